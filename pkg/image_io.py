import logging
import os

import numpy as np
from PIL import Image, UnidentifiedImageError

from data_validation import ImageReadError, ParameterError, validate_gray_image

logger = logging.getLogger(__name__)

READ_FORMATS = {"PNG", "PPM"}  # Pillow reports binary PGM under its PPM plugin
WRITE_EXTENSIONS = {".png", ".pgm"}


def read_image(path):
    """
    Read an 8-bit grayscale or RGB image

    Parameters:
    - path: PNG or binary PGM/PPM file

    Returns:
    - uint8 array of shape (H, W) or (H, W, 3), raises ImageReadError if the file
      is missing, not decodable or not one of the supported formats
    """
    if not os.path.isfile(path):
        raise ImageReadError(f"Image file not found: {path}")
    try:
        with Image.open(path) as im:
            if im.format not in READ_FORMATS:
                raise ImageReadError(f"{path}: unsupported format {im.format} (PNG, PGM and PPM only)")
            if im.mode == "L":
                data = np.array(im, dtype=np.uint8)
            elif im.mode in ("RGB", "RGBA", "P", "LA"):
                data = np.array(im.convert("RGB"), dtype=np.uint8)
            else:
                raise ImageReadError(f"{path}: unsupported pixel mode {im.mode} (8-bit only)")
    except (UnidentifiedImageError, OSError) as e:
        if isinstance(e, ImageReadError):
            raise
        raise ImageReadError(f"Could not read image {path}: {e}") from e

    logger.debug("Read %s (%dx%d, %s)", path, data.shape[1], data.shape[0], "rgb" if data.ndim == 3 else "gray")
    return data


def to_uint8(img):
    """Round and clamp an intensity grid to stored 8-bit values"""
    img = np.asarray(img)
    if img.dtype == np.uint8:
        return img
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def write_image(path, img):
    """
    Write a grayscale image as PNG or binary PGM, chosen by the file extension

    Parameters:
    - path: destination ending in .png or .pgm
    - img: 2D intensity array (real values are rounded and clamped)

    Returns:
    - the path written
    """
    validate_gray_image(img)
    extension = os.path.splitext(path)[1].lower()
    if extension not in WRITE_EXTENSIONS:
        raise ParameterError(f"Cannot write {path}: only .png and .pgm are supported")

    directory = os.path.dirname(path)
    if directory and not os.path.exists(directory):
        os.makedirs(directory)

    Image.fromarray(to_uint8(img)).save(path)
    logger.debug("Wrote %s", path)
    return path


def output_path(output_dir, source_path, suffix, extension=".png"):
    """Build out_dir/<source stem><suffix><extension>"""
    stem = os.path.splitext(os.path.basename(source_path))[0]
    return os.path.join(output_dir, f"{stem}{suffix}{extension}")
