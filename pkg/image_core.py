"""Geometric and numeric substrate: luminance, smoothing, warping, pyramids."""
import logging
import math

import numpy as np
from scipy.ndimage import correlate1d

from data_validation import (
    DimensionError,
    validate_gray_image,
    validate_min_size,
    validate_positive,
    validate_count,
)
from model import Motion, Pyramid, ValidityMask

logger = logging.getLogger(__name__)

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114], dtype=np.float64)
MIN_PYRAMID_SIZE = 32
PYRAMID_SIGMA = 1.0
PYRAMID_RADIUS = 2


def to_luminance(img):
    """
    Convert an RGB image to 8-bit luminance

    Parameters:
    - img: uint8 array (H, W, 3), or (H, W) which passes through unchanged

    Returns:
    - uint8 array (H, W), raises DimensionError for empty input
    """
    img = np.asarray(img)
    if img.size == 0 or 0 in img.shape:
        raise DimensionError(f"Cannot convert an empty image of shape {img.shape}")
    if img.ndim == 2:
        return img
    if img.ndim != 3 or img.shape[2] != 3:
        raise DimensionError(f"Expected an RGB image of shape (H, W, 3), got {img.shape}")

    luma = img.astype(np.float64) @ LUMA_WEIGHTS
    return np.clip(np.rint(luma), 0, 255).astype(np.uint8)


def gaussian_kernel(sigma, radius):
    """Normalized 1D Gaussian taps for offsets -radius..radius"""
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(offsets ** 2) / (2.0 * sigma ** 2))
    return kernel / kernel.sum()


def gaussian_smooth(img, sigma, radius):
    """
    Separable Gaussian smoothing with edge replication

    Parameters:
    - img: 2D intensity array
    - sigma: standard deviation in pixels, > 0
    - radius: kernel half-width in pixels, >= 1

    Returns:
    - float64 array of the same shape
    """
    validate_gray_image(img)
    validate_positive(sigma, "sigma")
    validate_count(radius, "radius")

    kernel = gaussian_kernel(sigma, radius)
    out = correlate1d(np.asarray(img, dtype=np.float64), kernel, axis=0, mode="nearest")
    return correlate1d(out, kernel, axis=1, mode="nearest")


def sample_grid(height, width, motion):
    """
    Source coordinates psi(p) for every output pixel p

    Rotation is about the image center; x is the column, y the row index.
    """
    cx, cy = (width - 1) / 2.0, (height - 1) / 2.0
    c, s = math.cos(motion.theta), math.sin(motion.theta)
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    dx, dy = xs - cx, ys - cy
    sx = cx + (c * dx - s * dy) + motion.tx
    sy = cy + (s * dx + c * dy) + motion.ty
    return sx, sy


def warp_euclidean(img, motion):
    """
    Resample an image through a Euclidean motion with bilinear interpolation

    The output pixel p takes the value of img at psi(p). A sample whose
    interpolation footprint leaves the image is masked and set to 0; taps with
    zero weight (samples exactly on the last row or column) do not count.

    Parameters:
    - img: 2D intensity array
    - motion: Motion

    Returns:
    - (float64 warped image, ValidityMask)
    """
    validate_gray_image(img)
    src = np.asarray(img, dtype=np.float64)
    height, width = src.shape
    sx, sy = sample_grid(height, width, motion)

    valid = (sx >= 0) & (sx <= width - 1) & (sy >= 0) & (sy <= height - 1)
    sx = np.clip(sx, 0, width - 1)
    sy = np.clip(sy, 0, height - 1)

    x0 = np.clip(np.floor(sx).astype(np.intp), 0, max(width - 2, 0))
    y0 = np.clip(np.floor(sy).astype(np.intp), 0, max(height - 2, 0))
    x1 = np.minimum(x0 + 1, width - 1)
    y1 = np.minimum(y0 + 1, height - 1)
    fx = sx - x0
    fy = sy - y0

    top = (1.0 - fx) * src[y0, x0] + fx * src[y0, x1]
    bottom = (1.0 - fx) * src[y1, x0] + fx * src[y1, x1]
    out = (1.0 - fy) * top + fy * bottom
    out[~valid] = 0.0
    return out, ValidityMask(valid)


def downsample(img):
    """Smooth then keep every second row and column (floor halving)"""
    smoothed = gaussian_smooth(img, PYRAMID_SIGMA, PYRAMID_RADIUS)
    height, width = smoothed.shape
    return smoothed[0:2 * (height // 2):2, 0:2 * (width // 2):2]


def build_pyramid(img, max_levels):
    """
    Build a Gaussian pyramid

    Parameters:
    - img: 2D intensity array with both dimensions >= 32
    - max_levels: upper bound on the number of levels

    Returns:
    - Pyramid with level 0 at full resolution; no level is smaller than 32
    """
    validate_min_size(img, MIN_PYRAMID_SIZE)
    validate_count(max_levels, "max_levels")

    levels = [np.asarray(img, dtype=np.float64)]
    while len(levels) < max_levels:
        height, width = levels[-1].shape
        if min(height // 2, width // 2) < MIN_PYRAMID_SIZE:
            break
        levels.append(downsample(levels[-1]))

    logger.debug("Pyramid sizes: %s", [lvl.shape for lvl in levels])
    return Pyramid(levels)


def scale_motion_to_finer(motion):
    """Carry a motion one pyramid level down: rotation kept, translation doubled"""
    return Motion(motion.theta, 2.0 * motion.tx, 2.0 * motion.ty)


def halve_motion(motion):
    """Carry a motion one pyramid level up"""
    return Motion(motion.theta, motion.tx / 2.0, motion.ty / 2.0)


def rotate_vector(theta, x, y):
    c, s = math.cos(theta), math.sin(theta)
    return c * x - s * y, s * x + c * y


def compose_motion(outer, inner):
    """
    Motion equivalent to applying inner first and outer second

    psi_result(p) = psi_outer(psi_inner(p)), both about the same center.
    """
    rx, ry = rotate_vector(outer.theta, inner.tx, inner.ty)
    return Motion(outer.theta + inner.theta, outer.tx + rx, outer.ty + ry)


def invert_motion(motion):
    rx, ry = rotate_vector(-motion.theta, motion.tx, motion.ty)
    return Motion(-motion.theta, -rx, -ry)
