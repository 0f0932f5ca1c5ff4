import pytest

from config import DEFAULT_OUTPUT_DIR, config_from_dict, get_align_config, get_default_jobs, get_output_dir
from data_validation import ConfigError, ParameterError
from model import AlignConfig, CoderKind, NormalizationMode

ENV_NAMES = ["OUTPUT_DIR", "LEVELS", "MAX_ITERS", "ALPHA", "BETA", "SIGMA", "CODER", "NORMALIZATION",
             "HISTOGRAM_INIT", "JOBS"]


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for name in ENV_NAMES:
        monkeypatch.delenv("EXPOSURE_ALIGN_" + name, raising=False)


def test_defaults():
    assert get_align_config() == AlignConfig()
    assert get_output_dir() == DEFAULT_OUTPUT_DIR
    assert get_default_jobs() == 1


def test_environment_overrides_defaults(monkeypatch):
    monkeypatch.setenv("EXPOSURE_ALIGN_LEVELS", "3")
    monkeypatch.setenv("EXPOSURE_ALIGN_CODER", "census")
    monkeypatch.setenv("EXPOSURE_ALIGN_HISTOGRAM_INIT", "no")
    monkeypatch.setenv("EXPOSURE_ALIGN_OUTPUT_DIR", "elsewhere")
    cfg = get_align_config()
    assert cfg.max_pyramid_levels == 3
    assert cfg.coder is CoderKind.CENSUS_GE
    assert cfg.use_histogram_init is False
    assert get_output_dir() == "elsewhere"


def test_explicit_values_win(monkeypatch):
    monkeypatch.setenv("EXPOSURE_ALIGN_ALPHA", "10")
    monkeypatch.setenv("EXPOSURE_ALIGN_OUTPUT_DIR", "elsewhere")
    cfg = get_align_config(alpha=3, normalization="unidirectional", beta=None)
    assert cfg.alpha == 3
    assert cfg.beta == 254
    assert cfg.normalization is NormalizationMode.UNIDIRECTIONAL
    assert get_output_dir("out") == "out"


@pytest.mark.parametrize("name, value", [("LEVELS", "many"), ("CODER", "sift"), ("HISTOGRAM_INIT", "maybe")])
def test_malformed_environment(monkeypatch, name, value):
    monkeypatch.setenv("EXPOSURE_ALIGN_" + name, value)
    with pytest.raises(ConfigError):
        get_align_config()


def test_invalid_combination():
    with pytest.raises(ParameterError):
        get_align_config(alpha=200, beta=100)


def test_config_echo_round_trip():
    cfg = AlignConfig(coder=CoderKind.MTB, sigma=0.75, use_histogram_init=False)
    echoed = {key: str(value).lower() if isinstance(value, bool) else str(value) for key, value in cfg.to_dict().items()}
    assert config_from_dict(echoed) == cfg
