"""Synthetic test pairs, motion errors and mutual information."""
import math

import numpy as np
import pandas as pd

from align import level_cost
from data_validation import (
    DegenerateInputError,
    validate_count,
    validate_ev,
    validate_gray_image,
    validate_motion,
    validate_same_shape,
)
from image_core import warp_euclidean
from image_io import to_uint8
from model import AlignConfig, JointHistogram, Motion, MotionError

DEFAULT_BINS = 64
RESPONSE_GAMMA = 2.2
ERROR_COLUMNS = ["d_theta", "d_ty", "d_tx"]


def synth_warp(img, motion):
    """Warp a test image by a known motion; uncovered pixels become 0"""
    validate_gray_image(img)
    validate_motion(motion)
    warped, _ = warp_euclidean(img, motion)
    return to_uint8(warped)


def synth_exposure(img, ev):
    """
    Simulate a re-exposure of an 8-bit image by ev stops

    Intensities are linearized through a 2.2 power response, scaled by 2**ev,
    passed back through the response and clipped, so over-exposure saturates
    at 255.
    """
    validate_gray_image(img)
    validate_ev(ev)
    radiance = (np.asarray(img, dtype=np.float64) / 255.0) ** RESPONSE_GAMMA
    exposed = np.minimum(radiance * 2.0 ** ev, 1.0) ** (1.0 / RESPONSE_GAMMA)
    return np.clip(np.rint(255.0 * exposed), 0, 255).astype(np.uint8)


def motion_error(est, truth):
    """Absolute parameter errors, rotation in degrees"""
    return MotionError(
        d_theta=abs(est.degrees - truth.degrees),
        d_ty=abs(est.ty - truth.ty),
        d_tx=abs(est.tx - truth.tx),
    )


def _bin_index(img, bins):
    values = np.asarray(img, dtype=np.float64)
    return np.clip(np.floor(values * bins / 256.0), 0, bins - 1).astype(np.intp)


def _mask_bits(shape, mask):
    if mask is None:
        return np.ones(shape, dtype=bool)
    return mask.bits


def joint_histogram(a, b, mask=None, bins=DEFAULT_BINS):
    """B x B counts of binned intensity pairs over the masked pixels"""
    validate_same_shape(a, b, ("a", "b"))
    validate_count(bins, "bins", minimum=2)
    bits = _mask_bits(np.shape(a), mask)
    if not np.any(bits):
        raise DegenerateInputError("Mask selects no pixels")
    ia = _bin_index(a, bins)[bits]
    ib = _bin_index(b, bins)[bits]
    counts = np.bincount(ia * bins + ib, minlength=bins * bins).reshape(bins, bins)
    return JointHistogram(counts)


def entropy(img, mask=None, bins=DEFAULT_BINS):
    """Shannon entropy in bits of the binned intensity distribution"""
    validate_gray_image(img)
    bits = _mask_bits(np.shape(img), mask)
    if not np.any(bits):
        raise DegenerateInputError("Mask selects no pixels")
    counts = np.bincount(_bin_index(img, bins)[bits], minlength=bins)
    p = counts[counts > 0] / counts.sum()
    return math.fsum(-p * np.log2(p))


def mutual_information(a, b, mask=None, bins=DEFAULT_BINS):
    """
    Mutual information in bits between two images over the masked pixels

    Parameters:
    - a, b: images of the same size
    - mask: ValidityMask, all pixels when None
    - bins: histogram bins per axis (>= 2)

    Returns:
    - MI >= 0, raises DegenerateInputError for an empty mask
    """
    counts = joint_histogram(a, b, mask, bins).bins
    total = counts.sum()
    p = counts / total
    pa = counts.sum(axis=1) / total
    pb = counts.sum(axis=0) / total
    i, j = np.nonzero(p)
    terms = p[i, j] * np.log2(p[i, j] / (pa[i] * pb[j]))
    # integer marginals and fsum keep MI(a, b) == MI(b, a) exact
    return max(0.0, math.fsum(terms))


def shift_search_oracle(ref, mov, radius=3, cfg=None):
    """
    Exhaustive integer-translation search minimizing the mean coding cost

    Returns:
    - Motion(0, tx, ty) with mov ~= warp(ref, motion)
    """
    cfg = cfg or AlignConfig()
    best, best_cost = Motion(), np.inf
    for ty in range(-radius, radius + 1):
        for tx in range(-radius, radius + 1):
            cost, n = level_cost(ref, mov, Motion(0.0, float(tx), float(ty)), cfg)
            mean = cost / n if n else np.inf
            if mean < best_cost:
                best, best_cost = Motion(0.0, float(tx), float(ty)), mean
    return best


def errors_table(records, truths):
    """
    Per-image error table in (d_theta, d_ty, d_tx) layout

    Parameters:
    - records: report records (dicts with path, theta_deg, tx, ty, mi_before, mi_after)
    - truths: ground-truth dicts (theta_deg, tx, ty, ev) keyed by slave path

    Returns:
    - pandas DataFrame, one row per record with a known ground truth
    """
    rows = []
    for record in records:
        truth = truths.get(record["path"])
        if truth is None:
            continue
        est = Motion.from_degrees(float(record["theta_deg"]), float(record["tx"]), float(record["ty"]))
        true_motion = Motion.from_degrees(float(truth["theta_deg"]), float(truth["tx"]), float(truth["ty"]))
        error = motion_error(est, true_motion)
        rows.append({
            "path": record["path"],
            "sequence": truth.get("sequence", record.get("sequence", "default")),
            "ev": float(truth.get("ev", 0.0)),
            "d_theta": error.d_theta,
            "d_ty": error.d_ty,
            "d_tx": error.d_tx,
            "mi_before": float(record.get("mi_before", "nan")),
            "mi_after": float(record.get("mi_after", "nan")),
        })
    return pd.DataFrame(rows, columns=["path", "sequence", "ev", *ERROR_COLUMNS, "mi_before", "mi_after"])


def summarize_errors(table):
    """
    Mean / Max / Min of every error column

    Two aggregations are reported: over all images, and over per-sequence means
    (each sequence weighted equally regardless of its length).
    """
    if table.empty:
        return pd.DataFrame(columns=["aggregation", "stat", *ERROR_COLUMNS])

    per_image = table[ERROR_COLUMNS].agg(["mean", "max", "min"])
    per_sequence = table.groupby("sequence")[ERROR_COLUMNS].mean().agg(["mean", "max", "min"])

    frames = []
    for name, frame in (("per_image", per_image), ("per_sequence", per_sequence)):
        frame = frame.rename(index={"mean": "Mean", "max": "Max", "min": "Min"})
        frame.index.name = "stat"
        frame = frame.reset_index()
        frame.insert(0, "aggregation", name)
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)
