"""Intensity mapping functions between two exposures of the same scene."""
import logging

import numpy as np

from data_validation import (
    DimensionError,
    OrderingError,
    ParameterError,
    validate_gray_image,
    validate_intensity,
)
from model import (
    Histogram,
    IntensityLut,
    NormalizationMode,
    NormalizedPair,
    SaturationThresholds,
)

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = 5
DEFAULT_BETA = 254
# Mean-intensity band inside which two exposures count as equally bright
EXPOSURE_TOLERANCE = 1.0


def _as_stored(img, name="image"):
    validate_gray_image(img, name)
    img = np.asarray(img)
    if img.dtype == np.uint8:
        return img
    if not np.issubdtype(img.dtype, np.integer) or img.min() < 0 or img.max() > 255:
        raise ParameterError(f"{name} must hold 8-bit intensities, got dtype {img.dtype}")
    return img.astype(np.uint8)


def histogram(img):
    """Count the pixels at every intensity level 0..255"""
    img = _as_stored(img)
    return Histogram(np.bincount(img.ravel(), minlength=256).astype(np.int64))


def estimate_imf(z1, z2):
    """
    Estimate the IMFs f12 (z1 -> z2) and f21 (z2 -> z1) by matching cumulative histograms

    f12[z] is the smallest v with H2(v) >= H1(z), where H are the cumulative
    histograms normalized to [0, 1]. The comparison is done on integer counts
    cross-multiplied by the pixel totals so that it is exact.

    Parameters:
    - z1, z2: 8-bit images of the same scene (sizes may differ)

    Returns:
    - (f12, f21) IntensityLut pair, both monotone non-decreasing
    """
    for name, img in (("z1", z1), ("z2", z2)):
        if np.asarray(img).size == 0:
            raise DimensionError(f"{name} is empty")

    h1, h2 = histogram(z1), histogram(z2)
    c1, c2 = h1.cumulative(), h2.cumulative()
    n1, n2 = h1.total, h2.total

    f12 = np.searchsorted(c2 * n1, c1 * n2, side="left")
    f21 = np.searchsorted(c1 * n2, c2 * n1, side="left")
    return (
        IntensityLut(np.minimum(f12, 255).astype(np.uint8)),
        IntensityLut(np.minimum(f21, 255).astype(np.uint8)),
    )


def compute_thresholds(f12, f21, alpha=DEFAULT_ALPHA, beta=DEFAULT_BETA):
    """
    Saturation thresholds zeta1 / zeta2 from the two IMFs

    zeta1 = max{z : f12[z] <= alpha} (0 if none), zeta2 = min{z : f21[z] >= beta}
    (255 if none), then zeta1 = min(zeta1, beta) and zeta2 = max(zeta2, alpha).
    """
    validate_intensity(alpha, "alpha")
    validate_intensity(beta, "beta")
    if alpha >= beta:
        raise ParameterError(f"alpha ({alpha}) must be smaller than beta ({beta})")

    below = np.nonzero(f12.table <= alpha)[0]
    above = np.nonzero(f21.table >= beta)[0]
    zeta1 = int(below.max()) if below.size else 0
    zeta2 = int(above.min()) if above.size else 255

    return SaturationThresholds(
        alpha=alpha,
        beta=beta,
        zeta1=min(zeta1, beta),
        zeta2=max(zeta2, alpha),
    )


def apply_normalization(z1, z2, thresholds, f12, f21):
    """
    Map both exposures with known thresholds and IMFs

    Z1 keeps pixels >= zeta1 and maps the rest through f12; Z2 keeps pixels
    <= zeta2 and maps the rest through f21.
    """
    z1 = _as_stored(z1, "z1")
    z2 = _as_stored(z2, "z2")
    z1_hat = np.where(z1 >= thresholds.zeta1, z1, f12(z1)).astype(np.uint8)
    z2_hat = np.where(z2 <= thresholds.zeta2, z2, f21(z2)).astype(np.uint8)
    return NormalizedPair(z1_hat, z2_hat, thresholds, f12, f21)


def normalize_pair(z1, z2, alpha=DEFAULT_ALPHA, beta=DEFAULT_BETA):
    """
    Bidirectional, saturation-synchronized normalization of an exposure pair

    Parameters:
    - z1: longer exposure
    - z2: shorter exposure
    - alpha, beta: under/over-exposure levels

    Returns:
    - NormalizedPair, raises OrderingError if z1 is clearly darker than z2
    """
    z1 = _as_stored(z1, "z1")
    z2 = _as_stored(z2, "z2")
    mean1, mean2 = float(z1.mean()), float(z2.mean())
    if mean1 < mean2 - EXPOSURE_TOLERANCE:
        raise OrderingError(
            f"z1 must be the longer exposure (mean {mean1:.1f} < {mean2:.1f}); use order_by_exposure first"
        )

    f12, f21 = estimate_imf(z1, z2)
    thresholds = compute_thresholds(f12, f21, alpha, beta)
    logger.info("Saturation thresholds zeta1=%d zeta2=%d", thresholds.zeta1, thresholds.zeta2)
    return apply_normalization(z1, z2, thresholds, f12, f21)


def normalize_unidirectional(z1, z2, alpha=DEFAULT_ALPHA, beta=DEFAULT_BETA):
    """Map the whole long exposure onto the short exposure's intensity scale"""
    z1 = _as_stored(z1, "z1")
    z2 = _as_stored(z2, "z2")
    f12, f21 = estimate_imf(z1, z2)
    thresholds = compute_thresholds(f12, f21, alpha, beta)
    return NormalizedPair(f12(z1), z2.copy(), thresholds, f12, f21)


def normalize(z1, z2, mode=NormalizationMode.BIDIRECTIONAL, alpha=DEFAULT_ALPHA, beta=DEFAULT_BETA):
    """Dispatch on NormalizationMode; NONE returns the inputs with identity tables"""
    mode = NormalizationMode(mode)
    if mode is NormalizationMode.BIDIRECTIONAL:
        return normalize_pair(z1, z2, alpha, beta)
    if mode is NormalizationMode.UNIDIRECTIONAL:
        return normalize_unidirectional(z1, z2, alpha, beta)

    identity = IntensityLut.identity()
    return NormalizedPair(
        _as_stored(z1, "z1").copy(),
        _as_stored(z2, "z2").copy(),
        SaturationThresholds(alpha=alpha, beta=beta, zeta1=0, zeta2=255),
        identity,
        identity,
    )


def order_by_exposure(a, b):
    """
    Order two images by mean intensity, brightest first

    Returns:
    - (long, short, swapped); ties within the tolerance band keep input order
    """
    mean_a, mean_b = float(np.mean(a)), float(np.mean(b))
    if mean_b - mean_a > EXPOSURE_TOLERANCE:
        return b, a, True
    return a, b, False
