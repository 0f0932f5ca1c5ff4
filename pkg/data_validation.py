import math

import numpy as np


class ValidationError(ValueError):
    """Exception raised for invalid inputs to the alignment pipeline"""
    pass


class DimensionError(ValidationError):
    """Image empty, too small, or not matching its partner"""
    pass


class ParameterError(ValidationError):
    """Numeric parameter outside its allowed range"""
    pass


class ConfigError(ParameterError):
    """Malformed configuration value from the environment"""
    pass


class ShapeError(ValidationError):
    """Bit planes of different depth or size"""
    pass


class OrderingError(ValidationError):
    """Exposure order of a pair is the wrong way round"""
    pass


class DegenerateInputError(ValidationError):
    """Input carries no usable information (no valid pixels, flat texture)"""
    pass


class ImageReadError(OSError):
    """Image file missing or not decodable"""
    pass


def validate_gray_image(img, name="image"):
    """
    Validate that an array is a non-empty 2D intensity grid

    Parameters:
    - img: array to check
    - name: label used in the error message

    Returns:
    - True if valid, raises DimensionError if invalid
    """
    img = np.asarray(img)
    if img.ndim != 2:
        raise DimensionError(f"{name} must be a 2D grayscale array, got shape {img.shape}")
    if img.size == 0:
        raise DimensionError(f"{name} is empty ({img.shape[1]}x{img.shape[0]})")
    return True


def validate_min_size(img, min_size, name="image"):
    """
    Validate that both image dimensions reach a minimum

    Parameters:
    - img: 2D array
    - min_size: smallest allowed width and height
    - name: label used in the error message

    Returns:
    - True if valid, raises DimensionError if invalid
    """
    validate_gray_image(img, name)
    height, width = np.asarray(img).shape
    if min(height, width) < min_size:
        raise DimensionError(f"{name} is {width}x{height}; both dimensions must be at least {min_size}")
    return True


def validate_same_shape(a, b, names=("reference", "slave")):
    """Raise DimensionError unless both arrays share one shape"""
    a_shape, b_shape = np.asarray(a).shape, np.asarray(b).shape
    if a_shape != b_shape:
        raise DimensionError(f"{names[0]} has shape {a_shape} but {names[1]} has shape {b_shape}")
    return True


def validate_planes_match(a, b):
    """Raise ShapeError unless two BitPlanes have equal depth and size"""
    if a.planes.shape != b.planes.shape:
        raise ShapeError(f"Bit planes differ in shape: {a.planes.shape} vs {b.planes.shape}")
    return True


def validate_positive(value, name):
    if not (isinstance(value, (int, float, np.floating, np.integer)) and math.isfinite(value) and value > 0):
        raise ParameterError(f"{name} must be a positive number, got {value!r}")
    return True


def validate_count(value, name, minimum=1):
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < minimum:
        raise ParameterError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return True


def validate_intensity(value, name):
    if not isinstance(value, (int, np.integer)) or not 0 <= value <= 255:
        raise ParameterError(f"{name} must be an intensity in [0, 255], got {value!r}")
    return True


def validate_ev(ev):
    if not math.isfinite(ev) or not -4.0 <= ev <= 4.0:
        raise ParameterError(f"Exposure shift must lie in [-4, 4] stops, got {ev}")
    return True


def validate_motion(motion):
    """
    Validate that a motion lies inside the method's basin

    Parameters:
    - motion: Motion to check

    Returns:
    - True if valid, raises ParameterError if theta is not finite or |theta| >= pi
    """
    values = (motion.theta, motion.tx, motion.ty)
    if not all(math.isfinite(v) for v in values):
        raise ParameterError(f"Motion parameters must be finite, got {values}")
    if abs(motion.theta) >= math.pi:
        raise ParameterError(f"Rotation {motion.theta} rad is outside (-pi, pi)")
    return True


def validate_align_config(cfg):
    """
    Validate all AlignConfig fields

    Parameters:
    - cfg: AlignConfig

    Returns:
    - True if all validations pass, raises ParameterError if any fails
    """
    validate_count(cfg.max_pyramid_levels, "max_pyramid_levels")
    validate_count(cfg.max_iters_per_level, "max_iters_per_level")
    validate_positive(cfg.sigma, "sigma")
    validate_positive(cfg.theta_tolerance, "theta_tolerance")
    validate_positive(cfg.translation_tolerance, "translation_tolerance")
    validate_intensity(cfg.alpha, "alpha")
    validate_intensity(cfg.beta, "beta")
    if cfg.alpha >= cfg.beta:
        raise ParameterError(f"alpha ({cfg.alpha}) must be smaller than beta ({cfg.beta})")
    return True
