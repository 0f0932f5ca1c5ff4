"""Binary local-pattern coding of luminance images and the costs between codes."""
import numpy as np

from data_validation import ShapeError, validate_min_size, validate_planes_match
from model import BitPlanes, CoderKind, PlaneGradients

# Neighbor offsets (row, column), clockwise from the top-left: NW, N, NE, E, SE, S, SW, W
NEIGHBORS = ((-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1))
MIN_CODE_SIZE = 3


def lower_median(img):
    flat = np.asarray(img).ravel()
    k = (flat.size - 1) // 2
    return np.partition(flat, k)[k]


def encode(img, kind=CoderKind.LBP_GT):
    """
    Code an image as binary bit planes

    For LBP (>) and census (>=) plane j is 1 where neighbor j compares true
    against the center pixel; borders compare against replicated neighbors.
    MTB yields a single plane set where the pixel exceeds the lower median.

    Parameters:
    - img: 2D intensity array, at least 3x3
    - kind: CoderKind

    Returns:
    - BitPlanes of depth 8 (LBP, census) or 1 (MTB)
    """
    validate_min_size(img, MIN_CODE_SIZE)
    kind = CoderKind(kind)
    img = np.asarray(img, dtype=np.float64)

    if kind is CoderKind.MTB:
        return BitPlanes((img > lower_median(img))[np.newaxis].astype(np.uint8))

    height, width = img.shape
    padded = np.pad(img, 1, mode="edge")
    planes = np.empty((len(NEIGHBORS), height, width), dtype=np.uint8)
    for j, (dy, dx) in enumerate(NEIGHBORS):
        neighbor = padded[1 + dy:1 + dy + height, 1 + dx:1 + dx + width]
        if kind is CoderKind.LBP_GT:
            planes[j] = neighbor > img
        else:
            planes[j] = neighbor >= img
    return BitPlanes(planes)


def to_decimal(planes):
    """Pack eight planes into one byte per pixel, plane j weighted 2**j (j from 0)"""
    if planes.depth != 8:
        raise ShapeError(f"Decimal coding needs 8 planes, got {planes.depth}")
    weights = (1 << np.arange(8, dtype=np.uint16))[:, np.newaxis, np.newaxis]
    return (planes.planes.astype(np.uint16) * weights).sum(axis=0).astype(np.uint8)


def from_decimal(codes):
    """Unpack a byte image back into eight bit planes"""
    codes = np.asarray(codes, dtype=np.uint8)
    shifts = np.arange(8, dtype=np.uint8)[:, np.newaxis, np.newaxis]
    return BitPlanes(((codes[np.newaxis] >> shifts) & 1).astype(np.uint8))


def decimal_distance(a_bits, b_bits):
    """
    Distance between two bit strings read as unsigned integers

    The strings are written most significant bit first, so (1,0,1,0,1,1,1,0)
    and (1,1,1,0,1,1,1,0) are 64 apart even though they differ in one bit.
    """
    def to_int(bits):
        return int("".join(str(int(bit)) for bit in bits), 2)

    return abs(to_int(a_bits) - to_int(b_bits))


def _mask_bits(planes, mask):
    if mask is None:
        return np.ones((planes.height, planes.width), dtype=bool)
    if mask.bits.shape != (planes.height, planes.width):
        raise ShapeError(f"Mask of shape {mask.bits.shape} does not fit planes of shape {planes.planes.shape}")
    return mask.bits


def hamming_cost(a, b, mask=None):
    """Number of mismatched bits over the masked pixels and all planes"""
    validate_planes_match(a, b)
    bits = _mask_bits(a, mask)
    mismatch = np.bitwise_xor(a.planes, b.planes)[:, bits]
    return int(np.count_nonzero(mismatch))


def squared_cost(a, b, mask=None):
    """
    Differentiable Hamming cost: sum of squared plane differences

    Equal to hamming_cost whenever both inputs are binary.
    """
    validate_planes_match(a, b)
    bits = _mask_bits(a, mask)
    diff = a.planes.astype(np.float64) - b.planes.astype(np.float64)
    return float(np.sum(diff[:, bits] ** 2))


def plane_gradients(planes):
    """Central-difference x/y derivatives of every plane, borders replicated"""
    validate_min_size(planes.planes[0], MIN_CODE_SIZE)
    padded = np.pad(planes.planes.astype(np.float64), ((0, 0), (1, 1), (1, 1)), mode="edge")
    dx = (padded[:, 1:-1, 2:] - padded[:, 1:-1, :-2]) / 2.0
    dy = (padded[:, 2:, 1:-1] - padded[:, :-2, 1:-1]) / 2.0
    return PlaneGradients(dx, dy)
