"""
Coarse-to-fine Euclidean alignment of differently exposed images.

Both images are normalized, coded as binary planes and compared with the
differentiable Hamming cost. Each iteration linearizes the warped slave's
planes around the reference, solves the 3x3 normal equations for
(tx, ty, theta) and composes the increment into the current estimate.

All public motions follow the convention of warp_euclidean: the returned
motion m satisfies slave ~= warp_euclidean(reference, m), so a slave pixel p
sits at psi_m(p) in the reference frame. The slave is brought onto the
reference with the inverse motion.
"""
import logging
from typing import NamedTuple

import numpy as np
from joblib import Parallel, delayed
from scipy.ndimage import binary_erosion
from scipy.signal import fftconvolve

from coder import encode, plane_gradients, squared_cost, to_decimal
from data_validation import (
    DegenerateInputError,
    validate_align_config,
    validate_min_size,
    validate_planes_match,
    validate_same_shape,
)
from image_core import (
    MIN_PYRAMID_SIZE,
    build_pyramid,
    compose_motion,
    gaussian_smooth,
    invert_motion,
    scale_motion_to_finer,
    to_luminance,
    warp_euclidean,
)
from image_io import to_uint8
from imf import normalize, order_by_exposure
from model import AlignConfig, AlignResult, BitPlanes, LevelStats, Motion, NormalEquations, ValidityMask

logger = logging.getLogger(__name__)

SMOOTHING_RADIUS = 1
CONDITION_LIMIT = 1e8
DAMPING_FACTOR = 1e-6
STEP_TOLERANCE = 1.01
INIT_SEARCH_FRACTION = 0.25
# trial rotations of the coarsest-level search, in degrees
INIT_ANGLES = tuple(range(-10, 11))
MIN_OVERLAP_FRACTION = 0.4
# smoothing radius plus the coding neighborhood
CODING_MARGIN = SMOOTHING_RADIUS + 1
EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


class LevelOutcome(NamedTuple):
    motion: Motion
    iterations: int
    cost: float
    valid_fraction: float
    converged: bool


class _CodedWarp(NamedTuple):
    motion: Motion  # motion applied to the slave
    planes: BitPlanes
    mask: ValidityMask
    cost: float

    @property
    def mean_cost(self):
        n = self.mask.count
        return self.cost / n if n else np.inf


def code_image(img, cfg):
    """Smooth in a 3x3 neighborhood and code with the configured descriptor"""
    return encode(gaussian_smooth(img, cfg.sigma, SMOOTHING_RADIUS), cfg.coder)


def coding_mask(mask):
    """Drop pixels whose smoothed code reads zero-filled samples"""
    bits = binary_erosion(mask.bits, structure=EIGHT_CONNECTED, iterations=CODING_MARGIN, border_value=1)
    return ValidityMask(bits)


def _coded_warp(ref_planes, mov_img, warp_motion, cfg):
    warped, mask = warp_euclidean(mov_img, warp_motion)
    mask = coding_mask(mask)
    planes = code_image(warped, cfg)
    cost = squared_cost(ref_planes, planes, mask) if mask.count else 0.0
    return _CodedWarp(warp_motion, planes, mask, cost)


def level_cost(ref_img, mov_img, motion, cfg=None):
    """
    Cost J between the coded reference and the slave brought back by a motion

    Parameters:
    - ref_img, mov_img: images of one pyramid level
    - motion: estimate with mov ~= warp(ref, motion)
    - cfg: AlignConfig (defaults when None)

    Returns:
    - (J, number of pixels summed)
    """
    cfg = cfg or AlignConfig()
    state = _coded_warp(code_image(ref_img, cfg), mov_img, invert_motion(motion), cfg)
    return state.cost, state.mask.count


def centered_coordinates(height, width):
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    return xs - (width - 1) / 2.0, ys - (height - 1) / 2.0


def linearization_rows(grads, height, width):
    """
    Per-pixel, per-plane Jacobian rows (d/dtx, d/dty, d/dtheta)

    The rotation row is x * dS/dy - y * dS/dx with (x, y) measured from the
    image center.
    """
    x, y = centered_coordinates(height, width)
    return grads.dx, grads.dy, grads.dy * x - grads.dx * y


def build_normal_equations(ref_planes, mov_planes, grads, mask=None):
    """
    Accumulate the 3x3 normal equations of the linearized coding residual

    Parameters:
    - ref_planes: coded reference
    - mov_planes: coded (warped) slave
    - grads: PlaneGradients of ref_planes
    - mask: ValidityMask of pixels to sum, all pixels when None

    Returns:
    - NormalEquations with A symmetric PSD and b = sum g (S_ref - S_mov),
      raises DegenerateInputError when no pixel is valid
    """
    validate_planes_match(ref_planes, mov_planes)
    height, width = ref_planes.height, ref_planes.width
    bits = mask.bits if mask is not None else np.ones((height, width), dtype=bool)
    n_valid = int(np.count_nonzero(bits))
    if n_valid == 0:
        raise DegenerateInputError("No valid pixels to build the normal equations from")

    rows = [row[:, bits] for row in linearization_rows(grads, height, width)]
    residual = (ref_planes.planes.astype(np.float64) - mov_planes.planes.astype(np.float64))[:, bits]

    A = np.zeros((3, 3), dtype=np.float64)
    for i in range(3):
        for k in range(i, 3):
            A[i, k] = A[k, i] = np.sum(rows[i] * rows[k])
    b = np.array([np.sum(row * residual) for row in rows], dtype=np.float64)
    return NormalEquations(A, b, n_valid)


def solve_update(eq):
    """
    Solve A u = b for the increment u = (tx, ty, theta)

    A Tikhonov term 1e-6 * trace(A) / 3 is added when A is ill-conditioned.

    Returns:
    - Motion increment, raises DegenerateInputError when A carries no information
    """
    A, b = eq.A, eq.b
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise DegenerateInputError("Normal equations contain non-finite values")
    trace = float(np.trace(A))
    if trace <= 0.0:
        raise DegenerateInputError("Normal equations are singular (no gradient information)")

    condition = np.linalg.cond(A)
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        damping = DAMPING_FACTOR * trace / 3.0
        logger.warning("Ill-conditioned normal equations (cond=%.3g); damping by %.3g", condition, damping)
        A = A + damping * np.eye(3)

    try:
        u = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as e:
        raise DegenerateInputError(f"Normal equations could not be solved: {e}") from e
    return Motion(theta=float(u[2]), tx=float(u[0]), ty=float(u[1]))


def _is_small(step, cfg):
    return abs(step.theta) < cfg.theta_tolerance and max(abs(step.tx), abs(step.ty)) < cfg.translation_tolerance


def _half(step):
    return Motion(step.theta / 2.0, step.tx / 2.0, step.ty / 2.0)


def align_level(ref_img, mov_img, init=None, cfg=None):
    """
    Iterate the linearized solve on one pyramid level

    Each iteration warps the slave by the current estimate, codes it, solves
    for an increment and composes it in. An increment that raises the mean
    cost by more than 1% is halved once; the iteration stops after that.

    Parameters:
    - ref_img, mov_img: images of equal size
    - init: starting Motion (zero when None)
    - cfg: AlignConfig

    Returns:
    - LevelOutcome(motion, iterations, cost, valid_fraction, converged)
    """
    cfg = cfg or AlignConfig()
    init = init or Motion()
    validate_same_shape(ref_img, mov_img)

    ref_planes = code_image(ref_img, cfg)
    grads = plane_gradients(ref_planes)
    state = _coded_warp(ref_planes, mov_img, invert_motion(init), cfg)
    best = state

    iterations = 0
    converged = False
    for iteration in range(1, cfg.max_iters_per_level + 1):
        try:
            step = solve_update(build_normal_equations(ref_planes, state.planes, grads, state.mask))
        except DegenerateInputError as e:
            if iteration == 1:
                logger.warning("Degenerate level, keeping the initial motion: %s", e)
                return LevelOutcome(init, 0, state.cost, state.mask.fraction, False)
            logger.info("Stopping after %d iterations: %s", iterations, e)
            break
        iterations = iteration

        candidate = _coded_warp(ref_planes, mov_img, compose_motion(state.motion, step), cfg)
        if candidate.mean_cost > state.mean_cost * STEP_TOLERANCE:
            logger.debug("Cost rose from %.5f to %.5f; halving the step", state.mean_cost, candidate.mean_cost)
            step = _half(step)
            candidate = _coded_warp(ref_planes, mov_img, compose_motion(state.motion, step), cfg)
            if candidate.mean_cost <= state.mean_cost * STEP_TOLERANCE:
                state = candidate
            break

        state = candidate
        if state.mean_cost <= best.mean_cost:
            best = state
        logger.debug(
            "iter %d: step=(%.4g, %.4g, %.4g) cost=%.1f",
            iteration, step.tx, step.ty, step.theta, state.cost,
        )
        if _is_small(step, cfg):
            converged = True
            break

    if state.mean_cost <= best.mean_cost:
        best = state
    return LevelOutcome(invert_motion(best.motion), iterations, best.cost, best.mask.fraction, converged)


def _best_shift(profile_ref, profile_mov, max_shift):
    """Shift s maximizing the normalized cross-correlation of ref[x + s] and mov[x]"""
    n = profile_ref.size
    best_shift, best_score = 0, -np.inf
    for shift in sorted(range(-max_shift, max_shift + 1), key=lambda s: (abs(s), s)):
        lo, hi = max(0, -shift), min(n, n - shift)
        if hi - lo < 2:
            continue
        a = profile_ref[lo + shift:hi + shift]
        b = profile_mov[lo:hi]
        a = a - a.mean()
        b = b - b.mean()
        norm = np.sqrt(np.sum(a * a) * np.sum(b * b))
        if norm <= 0.0:
            continue
        score = np.sum(a * b) / norm
        if score > best_score:
            best_shift, best_score = shift, score
    return best_shift


def init_histogram_match(ref_planes, mov_planes):
    """
    Initial translation from projection profiles of the coded images

    The column and row sums of the decimal codes are matched by normalized
    cross-correlation over +-25% of each dimension. Rotation starts at zero;
    flat profiles give a zero motion.
    """
    validate_planes_match(ref_planes, mov_planes)
    if ref_planes.depth == 8:
        ref, mov = to_decimal(ref_planes), to_decimal(mov_planes)
    else:
        ref, mov = ref_planes.planes[0], mov_planes.planes[0]
    ref = ref.astype(np.float64)
    mov = mov.astype(np.float64)

    height, width = ref.shape
    tx = _best_shift(ref.sum(axis=0), mov.sum(axis=0), int(INIT_SEARCH_FRACTION * width))
    ty = _best_shift(ref.sum(axis=1), mov.sum(axis=1), int(INIT_SEARCH_FRACTION * height))
    return Motion(0.0, float(tx), float(ty))


def _correlate(a, b):
    """c[s] = sum_p a(p + s) * b(p) for every shift, s = 0 at index (H - 1, W - 1)"""
    return fftconvolve(a, b[::-1, ::-1], mode="full")


def shift_search(ref_planes, mov_planes, ref_mask=None, max_shift=None):
    """
    Integer translation with the lowest mean squared coding cost

    Every shift s is scored as sum_p |ref(p + s) - mov(p)|^2 / overlap(s)
    for all shifts at once with FFT correlations of the planes.

    Parameters:
    - ref_planes, mov_planes: coded images of the same size
    - ref_mask: ValidityMask of ref_planes, all pixels when None
    - max_shift: (x, y) search radius, +-25% of each dimension when None

    Returns:
    - (Motion(0, sx, sy), mean cost); shifts overlapping less than 40% of
      the image are skipped, ties go to the smallest shift
    """
    validate_planes_match(ref_planes, mov_planes)
    height, width = ref_planes.height, ref_planes.width
    if max_shift is None:
        max_shift = (int(INIT_SEARCH_FRACTION * width), int(INIT_SEARCH_FRACTION * height))

    ref_bits = np.ones((height, width)) if ref_mask is None else ref_mask.bits.astype(np.float64)
    mov_bits = np.ones((height, width))
    ref = ref_planes.planes.astype(np.float64) * ref_bits
    mov = mov_planes.planes.astype(np.float64)

    # binary planes: a^2 = a
    overlap = np.rint(_correlate(ref_bits, mov_bits))
    cost = _correlate(ref.sum(axis=0), mov_bits) + _correlate(ref_bits, mov.sum(axis=0))
    for j in range(ref_planes.depth):
        cost -= 2.0 * _correlate(ref[j], mov[j])
    cost = np.rint(cost)

    xs = np.arange(-max_shift[0], max_shift[0] + 1)
    ys = np.arange(-max_shift[1], max_shift[1] + 1)
    window = np.ix_(ys + height - 1, xs + width - 1)
    n, total = overlap[window], cost[window]

    mean = np.full(n.shape, np.inf)
    enough = n >= MIN_OVERLAP_FRACTION * height * width
    mean[enough] = total[enough] / n[enough]
    if not enough.any():
        return Motion(), np.inf

    best = mean.min()
    rows, cols = np.nonzero(mean == best)
    k = int(np.argmin(np.abs(xs[cols]) + np.abs(ys[rows])))
    return Motion(0.0, float(xs[cols[k]]), float(ys[rows[k]])), float(best)


def initial_motion(ref_img, mov_img, cfg=None):
    """
    Starting motion for the coarsest pyramid level

    Candidates are zero motion, the projection-profile estimate and, for
    every trial angle, the best integer shift of the rotated reference.
    Each is scored with the mean level cost; the lowest wins and ties keep
    the earlier candidate, zero motion first.

    Parameters:
    - ref_img, mov_img: coarsest-level images of equal size
    - cfg: AlignConfig

    Returns:
    - Motion at the resolution of the given images
    """
    cfg = cfg or AlignConfig()
    validate_same_shape(ref_img, mov_img)
    ref_planes = code_image(ref_img, cfg)
    mov_planes = code_image(mov_img, cfg)

    candidates = [Motion(), init_histogram_match(ref_planes, mov_planes)]
    for degrees in INIT_ANGLES:
        rotation = Motion.from_degrees(degrees)
        rotated, mask = warp_euclidean(ref_img, rotation)
        shift, _ = shift_search(code_image(rotated, cfg), mov_planes, coding_mask(mask))
        candidates.append(compose_motion(rotation, shift))

    best, best_cost = Motion(), np.inf
    for candidate in candidates:
        state = _coded_warp(ref_planes, mov_img, invert_motion(candidate), cfg)
        if state.mask.fraction < MIN_OVERLAP_FRACTION:
            continue
        if state.mean_cost < best_cost:
            best, best_cost = candidate, state.mean_cost
    logger.debug("Initial motion %s at mean cost %.4f", best, best_cost)
    return best


def align_pyramid(z1_hat, z2_hat, cfg=None):
    """
    Coarse-to-fine alignment of a normalized pair

    Parameters:
    - z1_hat: normalized reference
    - z2_hat: normalized slave, same size, both dimensions >= 32
    - cfg: AlignConfig

    Returns:
    - AlignResult at full resolution, per-level stats ordered coarsest first
    """
    cfg = cfg or AlignConfig()
    validate_align_config(cfg)
    validate_same_shape(z1_hat, z2_hat)
    validate_min_size(z1_hat, MIN_PYRAMID_SIZE)

    ref_pyramid = build_pyramid(z1_hat, cfg.max_pyramid_levels)
    mov_pyramid = build_pyramid(z2_hat, cfg.max_pyramid_levels)
    coarsest = len(ref_pyramid) - 1

    motion = Motion()
    init = None
    if cfg.use_histogram_init:
        motion = initial_motion(ref_pyramid.coarsest, mov_pyramid.coarsest, cfg)
        init = Motion(motion.theta, motion.tx * 2 ** coarsest, motion.ty * 2 ** coarsest)
        logger.info("Initialization: theta=%.1f deg tx=%.1f ty=%.1f", init.degrees, init.tx, init.ty)

    per_level = []
    for level in range(coarsest, -1, -1):
        outcome = align_level(ref_pyramid.levels[level], mov_pyramid.levels[level], motion, cfg)
        per_level.append(LevelStats(level, outcome.iterations, outcome.cost, outcome.valid_fraction, outcome.converged))
        logger.info(
            "Level %d: theta=%.3f deg tx=%.2f ty=%.2f after %d iterations",
            level, outcome.motion.degrees, outcome.motion.tx, outcome.motion.ty, outcome.iterations,
        )
        motion = outcome.motion
        if level > 0:
            motion = scale_motion_to_finer(motion)

    return AlignResult(motion=motion, per_level=per_level, converged=per_level[-1].converged, init=init)


def align(z1, z2, cfg=None):
    """
    Align a slave exposure to a reference exposure end to end

    The pair is ordered by exposure, normalized, aligned on pyramids and the
    ORIGINAL slave is resampled into the reference frame.

    Parameters:
    - z1: reference image (8-bit gray or RGB)
    - z2: slave image of the same size
    - cfg: AlignConfig

    Returns:
    - (AlignResult with the slave -> reference motion, aligned slave as uint8)
    """
    cfg = cfg or AlignConfig()
    z1 = to_luminance(z1)
    z2 = to_luminance(z2)
    validate_same_shape(z1, z2)

    long_img, short_img, swapped = order_by_exposure(z1, z2)
    pair = normalize(long_img, short_img, cfg.normalization, cfg.alpha, cfg.beta)
    result = align_pyramid(pair.z1_hat, pair.z2_hat, cfg)

    if swapped:
        result.motion = invert_motion(result.motion)
        if result.init is not None:
            result.init = invert_motion(result.init)
    result.swapped = swapped

    aligned, _ = warp_euclidean(z2, invert_motion(result.motion))
    return result, to_uint8(aligned)


def align_stack(reference, slaves, cfg=None, n_jobs=1):
    """Align every slave to the one reference; results come back in input order"""
    cfg = cfg or AlignConfig()
    return Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(align)(reference, slave, cfg) for slave in slaves
    )
