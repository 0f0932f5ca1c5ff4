import os

from dotenv import load_dotenv

from data_validation import ConfigError, validate_align_config
from model import AlignConfig, CoderKind, NormalizationMode

# Load environment variables
load_dotenv()

ENV_PREFIX = "EXPOSURE_ALIGN_"
DEFAULT_OUTPUT_DIR = "aligned"


def _env(name, cast, default):
    """Read one prefixed environment variable, falling back to the default"""
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return cast(raw.strip())
    except ValueError as e:
        raise ConfigError(f"{ENV_PREFIX}{name}={raw!r} is not valid: {e}") from e


def _flag(raw):
    value = raw.lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def get_output_dir(explicit=None):
    """Get the output directory from the command line, the environment or the default"""
    if explicit:
        return explicit
    return _env("OUTPUT_DIR", str, DEFAULT_OUTPUT_DIR)


def get_default_jobs():
    return _env("JOBS", int, 1)


def get_align_config(**overrides):
    """
    Build the alignment configuration

    Values given as keyword arguments win over the environment, which wins over
    the AlignConfig defaults. Overrides set to None are ignored.

    Returns:
    - validated AlignConfig, raises ConfigError/ParameterError if invalid
    """
    defaults = AlignConfig()
    values = {
        "max_pyramid_levels": _env("LEVELS", int, defaults.max_pyramid_levels),
        "max_iters_per_level": _env("MAX_ITERS", int, defaults.max_iters_per_level),
        "alpha": _env("ALPHA", int, defaults.alpha),
        "beta": _env("BETA", int, defaults.beta),
        "sigma": _env("SIGMA", float, defaults.sigma),
        "coder": _env("CODER", CoderKind, defaults.coder),
        "normalization": _env("NORMALIZATION", NormalizationMode, defaults.normalization),
        "use_histogram_init": _env("HISTOGRAM_INIT", _flag, defaults.use_histogram_init),
    }
    values.update({key: value for key, value in overrides.items() if value is not None})

    if isinstance(values["coder"], str):
        values["coder"] = CoderKind(values["coder"])
    if isinstance(values["normalization"], str):
        values["normalization"] = NormalizationMode(values["normalization"])

    cfg = AlignConfig(**values)
    validate_align_config(cfg)
    return cfg


def config_from_dict(data):
    """Rebuild an AlignConfig from the echo written into a run report"""
    casts = {
        "max_pyramid_levels": int,
        "max_iters_per_level": int,
        "theta_tolerance": float,
        "translation_tolerance": float,
        "coder": CoderKind,
        "sigma": float,
        "alpha": int,
        "beta": int,
        "use_histogram_init": _flag,
        "normalization": NormalizationMode,
    }
    try:
        values = {key: casts[key](str(value)) for key, value in data.items() if key in casts}
    except ValueError as e:
        raise ConfigError(f"Config echo is not valid: {e}") from e
    cfg = AlignConfig(**values)
    validate_align_config(cfg)
    return cfg
