import numpy as np
import pytest

from data_validation import DimensionError, OrderingError, ParameterError
from evaluation import synth_exposure
from imf import (
    apply_normalization,
    compute_thresholds,
    estimate_imf,
    histogram,
    normalize,
    normalize_pair,
    normalize_unidirectional,
    order_by_exposure,
)
from model import IntensityLut, NormalizationMode


@pytest.fixture
def ramp():
    """Every intensity level exactly four times"""
    return np.tile(np.arange(256, dtype=np.uint8), (4, 1))


def test_histogram_counts_every_pixel(texture):
    img = texture(30, 40)
    hist = histogram(img)
    assert hist.counts.shape == (256,)
    assert hist.total == img.size
    assert hist.cumulative()[-1] == img.size


class TestEstimateImf:
    def test_identical_images_map_occupied_levels_to_themselves(self, texture):
        img = texture(32, 32)
        f12, f21 = estimate_imf(img, img)
        levels = np.unique(img)
        np.testing.assert_array_equal(f12.table[levels], levels)
        np.testing.assert_array_equal(f21.table[levels], levels)

    def test_halved_exposure(self, ramp):
        f12, f21 = estimate_imf(ramp, ramp // 2)
        np.testing.assert_array_equal(f12.table, np.arange(256) // 2)
        np.testing.assert_array_equal(f21.table[:128], 2 * np.arange(128) + 1)
        assert np.all(f21.table[128:] == 255)

    def test_luts_are_monotone(self, texture):
        img = texture(48, 48)
        f12, f21 = estimate_imf(img, synth_exposure(img, -1.5))
        assert f12.is_monotone()
        assert f21.is_monotone()

    def test_longer_exposure_maps_down(self, texture):
        img = texture(48, 48)
        f12, _ = estimate_imf(img, synth_exposure(img, -2.0))
        assert np.all(f12.table <= np.arange(256))

    def test_sizes_may_differ(self, texture):
        f12, f21 = estimate_imf(texture(20, 30), texture(40, 10))
        assert f12.table.shape == f21.table.shape == (256,)

    def test_empty_image(self, ramp):
        with pytest.raises(DimensionError):
            estimate_imf(np.zeros((0, 0), dtype=np.uint8), ramp)

    def test_float_intensities_rejected(self):
        with pytest.raises(ParameterError):
            estimate_imf(np.full((4, 4), 0.5), np.zeros((4, 4), dtype=np.uint8))


class TestThresholds:
    def test_identity_luts(self):
        identity = IntensityLut.identity()
        thresholds = compute_thresholds(identity, identity, 5, 254)
        assert (thresholds.zeta1, thresholds.zeta2) == (5, 254)

    def test_halved_exposure(self, ramp):
        f12, f21 = estimate_imf(ramp, ramp // 2)
        thresholds = compute_thresholds(f12, f21, 5, 254)
        assert (thresholds.zeta1, thresholds.zeta2) == (11, 127)

    def test_fallbacks_when_no_level_qualifies(self):
        f12 = IntensityLut(np.full(256, 10, dtype=np.uint8))
        f21 = IntensityLut(np.full(256, 100, dtype=np.uint8))
        thresholds = compute_thresholds(f12, f21, 5, 254)
        assert (thresholds.zeta1, thresholds.zeta2) == (0, 255)

    def test_clamped_to_alpha_and_beta(self):
        f12 = IntensityLut(np.zeros(256, dtype=np.uint8))
        f21 = IntensityLut(np.full(256, 255, dtype=np.uint8))
        thresholds = compute_thresholds(f12, f21, 5, 254)
        assert (thresholds.zeta1, thresholds.zeta2) == (254, 5)

    @pytest.mark.parametrize("alpha, beta", [(200, 100), (5, 5), (-1, 254), (5, 300)])
    def test_bad_levels(self, alpha, beta):
        identity = IntensityLut.identity()
        with pytest.raises(ParameterError):
            compute_thresholds(identity, identity, alpha, beta)


class TestNormalizePair:
    def test_saturated_long_exposure_is_synchronized(self, ramp):
        z1 = np.minimum(2 * ramp.astype(np.int32), 255).astype(np.uint8)
        pair = normalize_pair(z1, ramp)
        assert (pair.thresholds.zeta1, pair.thresholds.zeta2) == (11, 127)
        np.testing.assert_array_equal(pair.z1_hat[z1 < 11], z1[z1 < 11] // 2)
        np.testing.assert_array_equal(pair.z1_hat[z1 >= 11], z1[z1 >= 11])
        assert np.all(pair.z2_hat[z1 == 255] == 255)
        np.testing.assert_array_equal(pair.z2_hat[ramp <= 127], ramp[ramp <= 127])

    def test_output_ranges(self, rng, texture):
        for _ in range(100):
            img = texture(32, 32)
            z2 = synth_exposure(img, float(rng.uniform(-3.0, -0.5)))
            z1 = synth_exposure(img, float(rng.uniform(0.0, 2.0)))
            pair = normalize_pair(z1, z2)
            t = pair.thresholds
            assert np.all((pair.z1_hat <= t.alpha) | (pair.z1_hat >= t.zeta1))
            assert np.all((pair.z2_hat <= t.zeta2) | (pair.z2_hat >= t.beta))
            assert pair.f12.is_monotone() and pair.f21.is_monotone()

    def test_reapplying_is_deterministic(self, texture):
        img = texture(32, 32)
        z2 = synth_exposure(img, -2.0)
        pair = normalize_pair(img, z2)
        again = apply_normalization(img, z2, pair.thresholds, pair.f12, pair.f21)
        np.testing.assert_array_equal(again.z1_hat, pair.z1_hat)
        np.testing.assert_array_equal(again.z2_hat, pair.z2_hat)

    def test_wrong_order(self, texture):
        img = texture(32, 32)
        with pytest.raises(OrderingError):
            normalize_pair(synth_exposure(img, -2.0), img)

    def test_equal_exposures_are_accepted(self, texture):
        img = texture(32, 32)
        pair = normalize_pair(img, img)
        assert pair.z1_hat.shape == img.shape


class TestModes:
    def test_none_returns_inputs(self, texture):
        img = texture(16, 16)
        z2 = synth_exposure(img, -1.0)
        pair = normalize(img, z2, NormalizationMode.NONE)
        np.testing.assert_array_equal(pair.z1_hat, img)
        np.testing.assert_array_equal(pair.z2_hat, z2)
        np.testing.assert_array_equal(pair.f12.table, np.arange(256))

    def test_unidirectional_maps_long_exposure_only(self, texture):
        img = texture(16, 16)
        z2 = synth_exposure(img, -1.0)
        pair = normalize_unidirectional(img, z2)
        np.testing.assert_array_equal(pair.z1_hat, pair.f12(img))
        np.testing.assert_array_equal(pair.z2_hat, z2)

    def test_mode_given_as_string(self, texture):
        img = texture(16, 16)
        pair = normalize(img, img, "unidirectional")
        assert pair.z1_hat.dtype == np.uint8


class TestOrderByExposure:
    def test_swaps_darker_first(self, texture):
        img = texture(16, 16)
        dark = synth_exposure(img, -2.0)
        long_img, short_img, swapped = order_by_exposure(dark, img)
        assert swapped
        assert long_img is img and short_img is dark

    def test_keeps_order(self, texture):
        img = texture(16, 16)
        dark = synth_exposure(img, -2.0)
        assert order_by_exposure(img, dark)[2] is False

    def test_ties_keep_input_order(self, texture):
        img = texture(16, 16)
        long_img, _, swapped = order_by_exposure(img, img.copy())
        assert not swapped and long_img is img
