import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beampf import GainMask, PostfilterParams, apply_gain, wiener_gain

snrs = st.floats(min_value=0.0, max_value=1e6, allow_nan=False)


class TestParams:
    def test_defaults(self):
        p = PostfilterParams()
        assert p.mu == 1.3 and p.g_min == 0.1

    def test_zero_mu_allowed(self):
        assert np.all(wiener_gain(np.array([0.0, 5.0]), PostfilterParams(mu=0.0)) == 1.0)

    def test_invalid(self):
        with pytest.raises(ValueError):
            PostfilterParams(mu=-0.1)
        with pytest.raises(ValueError):
            PostfilterParams(g_min=0.0)
        with pytest.raises(ValueError):
            PostfilterParams(g_min=1.0)

    def test_threshold_closed_form(self):
        assert PostfilterParams().gain_threshold() == pytest.approx(1.3 / 0.9 - 1.0, abs=1e-15)


class TestWienerGain:
    def test_zero_snr_hits_floor(self):
        # max(1 - 1.3, 0.1) = 0.1 at the published parameter values
        assert wiener_gain(0.0) == 0.1

    def test_snr_twelve(self):
        assert wiener_gain(12.0) == pytest.approx(0.9, abs=1e-15)

    def test_limit_to_unity(self):
        assert wiener_gain(1e12) > 1.0 - 2e-12
        assert wiener_gain(1e12) <= 1.0

    @given(snr=snrs)
    @settings(max_examples=200, deadline=None)
    def test_bounds(self, snr):
        g = wiener_gain(snr)
        assert 0.1 <= g <= 1.0

    @given(a=snrs, b=snrs)
    @settings(max_examples=200, deadline=None)
    def test_monotone(self, a, b):
        lo, hi = sorted([a, b])
        assert wiener_gain(lo) <= wiener_gain(hi)

    def test_threshold_bisection_oracle(self):
        # locate the floor-exit numerically and compare to the closed form
        params = PostfilterParams()
        lo, hi = 0.0, 10.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if wiener_gain(mid, params) > params.g_min:
                hi = mid
            else:
                lo = mid
        assert hi == pytest.approx(params.gain_threshold(), abs=1e-12)
        assert params.gain_threshold() == pytest.approx(0.444444444444444, abs=1e-12)

    def test_gain_at_threshold(self):
        params = PostfilterParams()
        thr = params.gain_threshold()
        assert wiener_gain(thr, params) == pytest.approx(params.g_min, abs=1e-12)
        assert wiener_gain(thr * (1 + 1e-9), params) > params.g_min


class TestApplyGain:
    def test_unity_identity(self, rng):
        y = rng.standard_normal((4, 8)) + 1j * rng.standard_normal((4, 8))
        np.testing.assert_array_equal(apply_gain(y, np.ones((4, 8))), y)

    def test_floor_is_20db(self, rng):
        y = rng.standard_normal((4, 8)) + 1j * rng.standard_normal((4, 8))
        out = apply_gain(y, np.full((4, 8), 0.1))
        att = 20 * np.log10(np.abs(y) / np.abs(out))
        np.testing.assert_allclose(att, 20.0, atol=1e-9)

    def test_phase_preserved(self, rng):
        y = rng.standard_normal((5, 7)) + 1j * rng.standard_normal((5, 7))
        g = rng.uniform(0.1, 1.0, (5, 7))
        out = apply_gain(y, g)
        np.testing.assert_allclose(np.angle(out), np.angle(y), atol=1e-12)
        assert np.all(np.abs(out) <= np.abs(y) + 1e-15)

    def test_gain_mask_wrapper(self, rng):
        y = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
        g = rng.uniform(0.1, 1.0, (3, 4))
        np.testing.assert_array_equal(apply_gain(y, GainMask(g)), apply_gain(y, g))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape"):
            apply_gain(np.zeros((3, 4), dtype=complex), np.zeros((3, 5)))
