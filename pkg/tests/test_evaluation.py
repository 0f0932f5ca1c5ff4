import numpy as np
import pytest

from data_validation import DegenerateInputError, ParameterError
from evaluation import (
    entropy,
    errors_table,
    joint_histogram,
    motion_error,
    mutual_information,
    shift_search_oracle,
    summarize_errors,
    synth_exposure,
    synth_warp,
)
from model import Motion, ValidityMask


class TestSynthExposure:
    def test_zero_ev_is_identity(self, texture):
        img = texture(32, 32)
        np.testing.assert_array_equal(synth_exposure(img, 0.0), img)

    def test_overexposure_saturates(self):
        img = np.full((16, 16), 128, dtype=np.uint8)
        img[:8] = 100
        out = synth_exposure(img, 3.0)
        assert np.mean(out == 255) >= 0.5

    def test_monotone(self):
        ramp = np.arange(256, dtype=np.uint8).reshape(16, 16)
        for ev in (-3.0, -1.0, 1.5):
            assert np.all(np.diff(synth_exposure(ramp, ev).ravel().astype(int)) >= 0)

    def test_underexposure_darkens(self, texture):
        img = texture(32, 32)
        assert synth_exposure(img, -1.0).mean() < img.mean()

    @pytest.mark.parametrize("ev", [4.5, -5.0, float("nan")])
    def test_out_of_range(self, ev):
        with pytest.raises(ParameterError):
            synth_exposure(np.zeros((4, 4), dtype=np.uint8), ev)


class TestSynthWarp:
    def test_zero_motion(self, texture):
        img = texture(20, 20)
        out = synth_warp(img, Motion())
        assert out.dtype == np.uint8
        np.testing.assert_array_equal(out, img)

    def test_uncovered_pixels_are_black(self, texture):
        out = synth_warp(texture(20, 20), Motion(0.0, 5.0, 0.0))
        assert np.all(out[:, -5:] == 0)

    def test_rotation_outside_basin(self, texture):
        with pytest.raises(ParameterError):
            synth_warp(texture(8, 8), Motion(4.0, 0.0, 0.0))


class TestMotionError:
    def test_exact_estimate(self):
        truth = Motion.from_degrees(5.0, 10.0, 30.0)
        error = motion_error(truth, truth)
        assert (error.d_theta, error.d_ty, error.d_tx) == (0.0, 0.0, 0.0)

    def test_components(self):
        error = motion_error(Motion.from_degrees(4.9, 11.5, 28.5), Motion.from_degrees(5.0, 10.0, 30.0))
        assert error.d_theta == pytest.approx(0.1)
        assert error.d_ty == pytest.approx(1.5)
        assert error.d_tx == pytest.approx(1.5)

    def test_sign_does_not_matter(self):
        truth = Motion.from_degrees(5.0, 10.0, 30.0)
        above = motion_error(Motion.from_degrees(5.5, 12.0, 31.0), truth)
        below = motion_error(Motion.from_degrees(4.5, 8.0, 29.0), truth)
        assert above.d_theta == pytest.approx(below.d_theta)
        assert above.d_tx == pytest.approx(below.d_tx)
        assert above.d_ty == pytest.approx(below.d_ty)


class TestMutualInformation:
    def test_self_information_is_entropy(self, texture):
        img = texture(64, 64)
        assert mutual_information(img, img) == pytest.approx(entropy(img), abs=1e-9)

    def test_symmetric(self, texture):
        a, b = texture(48, 48), texture(48, 48)
        assert mutual_information(a, b) == mutual_information(b, a)

    def test_independent_noise(self, rng):
        a = rng.integers(0, 256, size=(256, 256))
        b = rng.integers(0, 256, size=(256, 256))
        mi = mutual_information(a, b)
        assert 0.0 <= mi < 0.05

    def test_constant_image_has_no_information(self, texture):
        assert mutual_information(np.full((16, 16), 9), texture(16, 16)) == 0.0

    def test_mask_restricts_pixels(self, texture):
        a, b = texture(16, 16), texture(16, 16)
        bits = np.zeros((16, 16), dtype=bool)
        bits[:8] = True
        joint = joint_histogram(a, b, ValidityMask(bits))
        assert joint.total == 128
        assert joint.bins.shape == (64, 64)

    def test_empty_mask(self, texture):
        img = texture(8, 8)
        with pytest.raises(DegenerateInputError):
            mutual_information(img, img, ValidityMask(np.zeros((8, 8), dtype=bool)))

    def test_too_few_bins(self, texture):
        img = texture(8, 8)
        with pytest.raises(ParameterError):
            mutual_information(img, img, bins=1)

    def test_alignment_raises_mi(self, shifted_pair):
        ref, mov, truth = shifted_pair(3, 2)
        aligned = synth_warp(mov, Motion(0.0, -truth.tx, -truth.ty))
        bits = np.zeros(ref.shape, dtype=bool)
        bits[2:, 3:] = True
        assert mutual_information(ref, aligned, ValidityMask(bits)) > mutual_information(ref, mov, ValidityMask(bits))


def test_shift_search_oracle_finds_the_shift(shifted_pair):
    ref, mov, truth = shifted_pair(2, -1, size=32)
    assert shift_search_oracle(ref, mov, radius=3) == truth


@pytest.fixture
def evaluated():
    records = [
        {"path": "a.png", "theta_deg": "5.1", "tx": "10.0", "ty": "31.0", "mi_before": "0.5", "mi_after": "1.5"},
        {"path": "b.png", "theta_deg": "4.8", "tx": "9.0", "ty": "30.0", "mi_before": "0.4", "mi_after": "1.2"},
        {"path": "c.png", "theta_deg": "5.0", "tx": "13.0", "ty": "30.0", "mi_before": "0.3", "mi_after": "1.0"},
        {"path": "unknown.png", "theta_deg": "0.0", "tx": "0.0", "ty": "0.0"},
    ]
    truth = {"theta_deg": "5.0", "tx": "10.0", "ty": "30.0", "ev": "-2.0"}
    truths = {
        "a.png": {**truth, "sequence": "s1"},
        "b.png": {**truth, "sequence": "s1"},
        "c.png": {**truth, "ev": "-1.0", "sequence": "s2"},
    }
    return errors_table(records, truths)


class TestErrorTables:
    def test_table_layout(self, evaluated):
        assert list(evaluated["path"]) == ["a.png", "b.png", "c.png"]
        assert list(evaluated.columns) == ["path", "sequence", "ev", "d_theta", "d_ty", "d_tx", "mi_before", "mi_after"]
        assert evaluated["d_tx"].tolist() == pytest.approx([0.0, 1.0, 3.0])
        assert evaluated["d_ty"].tolist() == pytest.approx([1.0, 0.0, 0.0])
        assert evaluated["d_theta"].tolist() == pytest.approx([0.1, 0.2, 0.0])

    def test_per_image_and_per_sequence(self, evaluated):
        summary = summarize_errors(evaluated).set_index(["aggregation", "stat"])
        assert summary.loc[("per_image", "Mean"), "d_tx"] == pytest.approx(4.0 / 3.0)
        assert summary.loc[("per_image", "Max"), "d_tx"] == pytest.approx(3.0)
        assert summary.loc[("per_image", "Min"), "d_tx"] == pytest.approx(0.0)
        # s1 averages 0.5, s2 averages 3.0
        assert summary.loc[("per_sequence", "Mean"), "d_tx"] == pytest.approx(1.75)
        assert summary.loc[("per_sequence", "Min"), "d_tx"] == pytest.approx(0.5)

    def test_empty(self):
        table = errors_table([], {})
        assert table.empty
        assert summarize_errors(table).empty
