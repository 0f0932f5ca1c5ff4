import numpy as np
import pytest
from scipy.ndimage import gaussian_filter

from model import Motion


def textured_image(rng, height, width, scales=((1.0, 0.3), (3.0, 1.0), (8.0, 2.0))):
    """Smooth multi-scale texture with a full 20..235 intensity range"""
    noise = rng.random((height, width))
    img = sum(weight * gaussian_filter(noise, sigma) for sigma, weight in scales)
    img = (img - img.min()) / (img.max() - img.min())
    return np.rint(20.0 + 215.0 * img).astype(np.uint8)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def texture(rng):
    """Factory for textured test images of a given size"""

    def make(height=64, width=64, scales=None):
        if scales is None:
            return textured_image(rng, height, width)
        return textured_image(rng, height, width, scales)

    return make


@pytest.fixture
def shifted_pair(rng):
    """
    Factory for a reference and a slave cut from one larger texture

    The slave is the same scene moved by an integer translation, so
    slave ~= warp_euclidean(reference, Motion(0, tx, ty)) without any fill.
    """

    def make(tx, ty, size=64, margin=8, scales=None):
        side = size + 2 * margin
        big = textured_image(rng, side, side) if scales is None else textured_image(rng, side, side, scales)
        reference = big[margin:margin + size, margin:margin + size]
        slave = big[margin + ty:margin + ty + size, margin + tx:margin + tx + size]
        return reference.copy(), slave.copy(), Motion(0.0, float(tx), float(ty))

    return make
