import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from beampf import (
    ArrayGeometry,
    average_input_cdr,
    cdr_at_beamformer_output,
    correction_factor,
    diffuse_coherence,
    diffuseness,
    direct_coherence,
    estimate_cdr_pair,
)
from beampf.beamforming import BeamformerWeights
from beampf.cdr import CDR_MAX, CdrEstimate


def model_coherence(cdr_true, gamma_n, tdoa=0.0, f=1000.0):
    """Forward mixture model: Gamma_x = (CDR * Gamma_s + Gamma_n) / (CDR + 1)."""
    gamma_s = direct_coherence(tdoa, f)
    return (cdr_true * gamma_s + gamma_n) / (cdr_true + 1.0)


class TestEstimateCdrPair:
    def test_pure_diffuse_gives_zero(self):
        for gn in (-0.2, 0.0, 0.3, 0.9):
            assert estimate_cdr_pair(gn + 0j, gn) == pytest.approx(0.0, abs=1e-12)

    def test_zero_diffuse_real_coherence(self):
        # closed form rho / (1 - rho) when Gamma_n = 0
        assert estimate_cdr_pair(0.5 + 0j, 0.0) == pytest.approx(1.0, abs=1e-12)
        assert estimate_cdr_pair(0.9 + 0j, 0.0) == pytest.approx(9.0, rel=1e-10)

    def test_unit_coherence_clamps_to_max(self):
        assert estimate_cdr_pair(1.0 + 0j, 0.3) == CDR_MAX
        assert estimate_cdr_pair(np.exp(0.4j), 0.0) == CDR_MAX

    def test_model_roundtrip_single_point(self):
        gamma_x = model_coherence(1.0, 0.3)
        assert estimate_cdr_pair(gamma_x, 0.3) == pytest.approx(1.0, rel=1e-6)

    def test_model_roundtrip_grid(self):
        # zero-TDOA manifold: exact recovery across the whole working range
        cdr_true = np.logspace(-2, 2, 41)
        gamma_n = np.linspace(-0.2, 0.99, 25)
        cc, gg = np.meshgrid(cdr_true, gamma_n, indexing="ij")
        est = estimate_cdr_pair(model_coherence(cc, gg), gg)
        np.testing.assert_allclose(est, cc, rtol=1e-6)

    def test_nan_coherence_propagates(self):
        out = estimate_cdr_pair(np.array([np.nan + 0j, 0.5 + 0j]), 0.0)
        assert np.isnan(out[0]) and out[1] == pytest.approx(1.0)

    @given(
        re=st.floats(-1.2, 1.2),
        im=st.floats(-1.2, 1.2),
        gn=st.floats(-1.0, 1.0),
    )
    @settings(max_examples=300, deadline=None)
    def test_total_nonnegative_finite(self, re, im, gn):
        out = estimate_cdr_pair(complex(re, im), gn)
        assert np.isfinite(out)
        assert 0.0 <= out <= CDR_MAX

    def test_vectorized_shapes(self, rng):
        gx = rng.uniform(-0.5, 0.5, (7, 5, 3)) + 1j * rng.uniform(-0.5, 0.5, (7, 5, 3))
        gn = rng.uniform(-0.2, 0.9, (5, 3))
        assert estimate_cdr_pair(gx, gn[None]).shape == (7, 5, 3)


class TestDiffuseness:
    def test_values(self):
        assert diffuseness(0.0) == 1.0
        assert diffuseness(1.0) == 0.5
        assert diffuseness(CDR_MAX) == pytest.approx(1e-4, rel=1e-3)

    @given(d=st.floats(1e-6, 1.0))
    @settings(max_examples=200, deadline=None)
    def test_roundtrip_identity(self, d):
        assert diffuseness((1.0 - d) / d) == pytest.approx(d, abs=1e-12)


class TestAverageInputCdr:
    def test_identical_pairs(self):
        d_mean, cdr_in = average_input_cdr(np.ones(10))
        assert d_mean == pytest.approx(0.5) and cdr_in == pytest.approx(1.0)

    def test_zero_and_infinite_pair(self):
        d_mean, cdr_in = average_input_cdr(np.array([0.0, np.inf]))
        assert d_mean == pytest.approx(0.5) and cdr_in == pytest.approx(1.0)

    def test_single_pair_identity(self):
        _, cdr_in = average_input_cdr(np.array([3.7]))
        assert cdr_in == pytest.approx(3.7, rel=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="pair"):
            average_input_cdr(np.empty((4, 0)))

    def test_nan_pairs_skipped(self):
        _, cdr_in = average_input_cdr(np.array([2.0, np.nan, 2.0]))
        assert cdr_in == pytest.approx(2.0, rel=1e-12)

    def test_all_invalid_point_treated_diffuse(self):
        # zero-signal points carry no information: diffuseness 1, CDR 0
        d_mean, cdr_in = average_input_cdr(np.array([[1.0, 1.0], [np.nan, np.nan]]))
        np.testing.assert_allclose(d_mean, [0.5, 1.0])
        np.testing.assert_allclose(cdr_in, [1.0, 0.0])

    def test_matrix_shapes(self, rng):
        pair_cdrs = rng.uniform(0, 10, (6, 9, 10))
        d_mean, cdr_in = average_input_cdr(pair_cdrs)
        assert d_mean.shape == (6, 9) and cdr_in.shape == (6, 9)
        assert np.all(cdr_in >= 0) and np.all(cdr_in <= CDR_MAX)


class TestCorrectionFactor:
    def test_one_hot_weight_is_unity(self, tablet_array):
        # all weight on one channel only sees the unit diagonal of J
        mask = np.array([True, True, False, False, False])
        w = np.zeros((3, 2), dtype=complex)
        w[:, 1] = 1.0
        a = correction_factor(BeamformerWeights(w, mask), tablet_array, [0.0, 1000.0, 4000.0])
        np.testing.assert_allclose(a, 1.0, atol=1e-12)

    def test_delay_and_sum_at_dc(self, tablet_array):
        w = np.full((1, 5), 0.2, dtype=complex)
        a = correction_factor(BeamformerWeights(w, np.ones(5, bool)), tablet_array, [0.0])
        assert a[0] == pytest.approx(1.0, abs=1e-12)

    def test_two_mic_hand_value(self):
        # J_12 = 0.6 and w = [1/2, 1/2]: a = 0.25 + 0.25 + 2*0.25*0.6 = 0.8
        geom = ArrayGeometry([[0, 0, 0], [0.1, 0, 0]])
        f = brentq(lambda f: diffuse_coherence(0.1, f) - 0.6, 100.0, 2000.0)
        w = BeamformerWeights(np.full((1, 2), 0.5, dtype=complex), np.ones(2, bool))
        assert correction_factor(w, geom, [f])[0] == pytest.approx(0.8, abs=1e-9)

    def test_positive_and_floored(self, tablet_array, rng):
        w = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        a = correction_factor(BeamformerWeights(w, np.ones(5, bool)), tablet_array,
                              np.linspace(0, 8000, 5))
        assert np.all(a > 0)


class TestCdrAtBeamformerOutput:
    def test_unity_correction_is_identity(self):
        assert cdr_at_beamformer_output(3.0, 1.0) == 3.0

    def test_division(self):
        assert cdr_at_beamformer_output(2.0, 0.5) == 4.0

    def test_suppressing_beamformer_raises_cdr(self, rng):
        cdr_in = rng.uniform(0, 100, 32)
        assert np.all(cdr_at_beamformer_output(cdr_in, 0.7) >= cdr_in)

    def test_clamped(self):
        assert cdr_at_beamformer_output(CDR_MAX, 1e-6) == CDR_MAX

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError, match="positive"):
            cdr_at_beamformer_output(1.0, 0.0)


class TestCdrEstimate:
    def test_from_cdr_consistency(self, rng):
        cdr = rng.uniform(0, 100, (4, 6))
        est = CdrEstimate.from_cdr(cdr)
        np.testing.assert_allclose(est.diffuseness, 1.0 / (1.0 + cdr))
