"""Sine and sampled-periodic excitation signals."""

import numpy as np
import pytest
from scipy.integrate import quad

from snubbeam import SampledPeriodicForcing, SineForcing, load_samples, read_force_file


def wrapped_piecewise_linear(times, values, period, t):
    """Brute-force oracle: evaluate the periodic extension segment by segment."""
    tm = t % period
    pts_t = list(times) + ([period] if times[-1] < period else [])
    pts_v = list(values) + ([values[0]] if times[-1] < period else [])
    for (t0, v0), (t1, v1) in zip(zip(pts_t, pts_v), zip(pts_t[1:], pts_v[1:])):
        if t0 <= tm <= t1:
            return v0 + (v1 - v0) * (tm - t0) / (t1 - t0)
    return pts_v[-1]


class TestSine:
    def test_quarter_period_peak(self):
        sig = SineForcing(amplitude=1.0, frequency=32.0)
        assert sig.value_at(1.0 / 128.0) == pytest.approx(1.0)

    def test_phase(self):
        sig = SineForcing(amplitude=2.0, frequency=5.0, phase=np.pi / 2.0)
        assert sig.value_at(0.0) == pytest.approx(2.0)

    @pytest.mark.parametrize("freq", [32.0, 124.0])
    def test_mean_zero_over_period(self, freq):
        sig = SineForcing(amplitude=1.0, frequency=freq)
        integral, _ = quad(sig.value_at, 0.0, 1.0 / freq)
        assert abs(integral) < 1e-12

    def test_periodicity(self):
        sig = SineForcing(amplitude=0.7, frequency=11.0)
        t = np.linspace(0.0, 0.09, 37)
        np.testing.assert_allclose(
            sig.value_at(t), sig.value_at(t + sig.period), atol=1e-12
        )

    def test_validation(self):
        with pytest.raises(ValueError):
            SineForcing(amplitude=-1.0, frequency=10.0)
        with pytest.raises(ValueError):
            SineForcing(amplitude=1.0, frequency=0.0)


class TestSampledPeriodic:
    def test_interpolation_against_brute_force(self):
        times, values, period = [0.0, 0.5], [0.0, 1.0], 1.0
        sig = SampledPeriodicForcing(times, values, period)
        for t in [0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.625, 3.1, 10.99]:
            expected = wrapped_piecewise_linear(times, values, period, t)
            assert sig.value_at(t) == pytest.approx(expected, abs=1e-12), t

    def test_wrap_segment_values(self):
        """t = 1.25 sits on the rising segment (0.5); t = 1.625 on the wrap
        segment where the value has fallen back to 0.75."""
        sig = SampledPeriodicForcing([0.0, 0.5], [0.0, 1.0], 1.0)
        assert sig.value_at(1.25) == pytest.approx(0.5)
        assert sig.value_at(1.625) == pytest.approx(0.75)

    def test_periodicity(self):
        sig = SampledPeriodicForcing([0.0, 0.2, 0.7], [1.0, -2.0, 0.5], 1.1)
        t = np.linspace(0.0, 2.0, 101)
        np.testing.assert_allclose(sig.value_at(t), sig.value_at(t + 1.1), atol=1e-12)

    def test_continuity_across_wrap(self):
        sig = SampledPeriodicForcing([0.0, 0.4], [3.0, -1.0], 1.0)
        eps = 1e-9
        left = sig.value_at(1.0 - eps)
        right = sig.value_at(1.0 + eps)
        assert left == pytest.approx(right, abs=1e-6)
        assert sig.value_at(1.0) == pytest.approx(3.0)

    def test_closed_period_uses_samples_directly(self):
        sig = SampledPeriodicForcing([0.0, 0.5, 1.0], [0.0, 1.0, 0.0], 1.0)
        assert sig.value_at(0.75) == pytest.approx(0.5)

    def test_breakpoint_spacing(self):
        sig = SampledPeriodicForcing([0.0, 0.1, 0.5], [0.0, 1.0, 0.0], 1.0)
        assert sig.min_breakpoint_spacing() == pytest.approx(0.1)
        assert SineForcing(1.0, 1.0).min_breakpoint_spacing() is None


class TestLoadSamples:
    def test_valid_rows(self):
        sig = load_samples([(0.0, 0.0), (0.5, 1.0)], period=1.0)
        assert isinstance(sig, SampledPeriodicForcing)
        assert sig.period == 1.0

    def test_non_ascending_rejected(self):
        with pytest.raises(ValueError, match="ascending"):
            load_samples([(0.0, 0.0), (0.0, 1.0)], period=1.0)

    def test_sample_beyond_period_rejected(self):
        with pytest.raises(ValueError, match="period"):
            load_samples([(0.0, 0.0), (1.5, 1.0)], period=1.0)

    def test_too_few_rows(self):
        with pytest.raises(ValueError, match="at least 2"):
            load_samples([(0.0, 0.0)], period=1.0)

    def test_non_finite_named_row(self):
        with pytest.raises(ValueError, match="row 1"):
            load_samples([(0.0, 0.0), (0.3, float("nan")), (0.5, 1.0)], period=1.0)

    def test_malformed_row_named(self):
        with pytest.raises(ValueError, match="row 1"):
            load_samples([(0.0, 0.0), ("x",), (0.5, 1.0)], period=1.0)

    def test_nonzero_start_rejected(self):
        with pytest.raises(ValueError, match="first sample"):
            load_samples([(0.1, 0.0), (0.5, 1.0)], period=1.0)


class TestForceFile:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "force.txt"
        path.write_text(
            "# measured shaker force\n"
            "0.0, 0.0\n"
            "0.005 1.25  # comma or whitespace\n"
            "\n"
            "0.010, -0.5\n"
        )
        rows = read_force_file(path)
        assert rows == [(0.0, 0.0), (0.005, 1.25), (0.010, -0.5)]
        sig = load_samples(rows, period=0.02)
        assert sig.value_at(0.0025) == pytest.approx(0.625)

    def test_bad_column_count(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("0.0 1.0 2.0\n")
        with pytest.raises(ValueError, match=":1:"):
            read_force_file(path)

    def test_bad_number(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("0.0 0.0\n0.1 oops\n")
        with pytest.raises(ValueError, match=":2:"):
            read_force_file(path)
