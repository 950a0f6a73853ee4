import numpy as np
import pytest

from beampf import (
    FrameParams,
    MultichannelSpectrum,
    SpectralAccumulator,
    estimate_noise_covariance,
    pairwise_coherence_track,
)
from beampf.spectral import channel_pairs


def complex_white(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


class TestAccumulate:
    def test_first_frame_hard_init(self, rng):
        acc = SpectralAccumulator(8, 2, forgetting=0.68)
        frame = complex_white(rng, (8, 2))
        acc.accumulate(frame)
        np.testing.assert_allclose(acc.psd, np.einsum("fn,fm->fnm", frame, frame.conj()))

    def test_two_frame_unrolled(self, rng):
        # Phi(1) = 0.68 x0 x0^H + 0.32 x1 x1^H
        acc = SpectralAccumulator(4, 3, forgetting=0.68)
        x0, x1 = complex_white(rng, (4, 3)), complex_white(rng, (4, 3))
        acc.accumulate(x0).accumulate(x1)
        expected = 0.68 * np.einsum("fn,fm->fnm", x0, x0.conj()) + 0.32 * np.einsum(
            "fn,fm->fnm", x1, x1.conj()
        )
        np.testing.assert_allclose(acc.psd, expected, atol=1e-14)

    def test_zero_forgetting_keeps_latest(self, rng):
        acc = SpectralAccumulator(4, 2, forgetting=0.0)
        for _ in range(5):
            frame = complex_white(rng, (4, 2))
            acc.accumulate(frame)
        np.testing.assert_allclose(acc.psd, np.einsum("fn,fm->fnm", frame, frame.conj()))

    def test_constant_frame_fixed_point(self, rng):
        acc = SpectralAccumulator(4, 2, forgetting=0.68)
        frame = complex_white(rng, (4, 2))
        for _ in range(60):
            acc.accumulate(frame)
        np.testing.assert_allclose(
            acc.psd, np.einsum("fn,fm->fnm", frame, frame.conj()), atol=1e-10
        )

    def test_hermitian_at_machine_precision(self, rng):
        acc = SpectralAccumulator(16, 4, forgetting=0.68)
        for _ in range(50):
            acc.accumulate(complex_white(rng, (16, 4)))
        np.testing.assert_array_equal(acc.psd, acc.psd.conj().transpose(0, 2, 1))
        assert np.all(np.abs(np.imag(np.diagonal(acc.psd, axis1=1, axis2=2))) == 0)

    def test_deterministic_given_order(self, rng):
        frames = complex_white(rng, (30, 8, 2))
        accs = [SpectralAccumulator(8, 2, 0.68) for _ in range(2)]
        for acc in accs:
            for frame in frames:
                acc.accumulate(frame)
        np.testing.assert_array_equal(accs[0].psd, accs[1].psd)

    def test_dimension_mismatch(self, rng):
        acc = SpectralAccumulator(8, 2)
        with pytest.raises(ValueError, match="shape"):
            acc.accumulate(complex_white(rng, (8, 3)))

    def test_bad_forgetting(self):
        with pytest.raises(ValueError):
            SpectralAccumulator(8, 2, forgetting=1.0)


class TestCoherence:
    def test_identical_channels(self, rng):
        acc = SpectralAccumulator(8, 2, 0.68)
        for _ in range(20):
            x = complex_white(rng, (8, 1))
            acc.accumulate(np.concatenate([x, x], axis=1))
        np.testing.assert_allclose(acc.coherence(0, 1), 1.0, atol=1e-12)

    def test_pure_phase_delay_conjugated(self, rng):
        # X_m = X_n e^{j a}  =>  coherence = e^{-j a} under Phi_nm = E[X_n X_m*]
        alpha = 0.8
        acc = SpectralAccumulator(8, 2, 0.68)
        for _ in range(30):
            x = complex_white(rng, (8, 1))
            acc.accumulate(np.concatenate([x, x * np.exp(1j * alpha)], axis=1))
        np.testing.assert_allclose(acc.coherence(0, 1), np.exp(-1j * alpha), atol=1e-12)

    def test_zero_auto_spectrum_marks_invalid(self):
        acc = SpectralAccumulator(4, 2, 0.68)
        frame = np.zeros((4, 2), dtype=complex)
        frame[:2, 0] = 1.0  # channel 1 silent everywhere, channel 0 only in low bins
        acc.accumulate(frame)
        gamma = acc.coherence(0, 1)
        assert np.all(np.isnan(gamma))

    def test_coherence_bounded(self, rng):
        acc = SpectralAccumulator(16, 3, 0.68)
        for _ in range(300):
            acc.accumulate(complex_white(rng, (16, 3)))
        for n in range(3):
            for m in range(n + 1, 3):
                assert np.all(np.abs(acc.coherence(n, m)) <= 1.0 + 1e-12)

    def test_independent_channels_monte_carlo(self, rng):
        # E|coherence|^2 for independent inputs tracks (1-lam)/(1+lam); the
        # ratio normalization biases it slightly low, hence the loose band.
        lam = 0.68
        acc = SpectralAccumulator(64, 2, lam)
        samples = []
        for l in range(12000):
            acc.accumulate(complex_white(rng, (64, 2)))
            if l >= 2000 and l % 100 == 0:
                samples.append(np.abs(acc.coherence(0, 1)) ** 2)
        measured = float(np.mean(samples))
        expected = (1 - lam) / (1 + lam)
        assert abs(measured - expected) < 0.15 * expected


class TestPairwiseCoherenceTrack:
    def test_matches_accumulator(self, rng):
        data = complex_white(rng, (25, 8, 3))
        gammas, pairs = pairwise_coherence_track(data, 0.68)
        assert pairs == [(0, 1), (0, 2), (1, 2)]
        acc = SpectralAccumulator(8, 3, 0.68)
        for l in range(25):
            acc.accumulate(data[l])
            for p, (n, m) in enumerate(pairs):
                np.testing.assert_allclose(gammas[l, :, p], acc.coherence(n, m), atol=1e-12)

    def test_mask_drops_pairs(self, rng):
        data = complex_white(rng, (5, 8, 4))
        _, pairs = pairwise_coherence_track(data, 0.68, mask=[True, False, True, True])
        assert pairs == [(0, 2), (0, 3), (2, 3)]

    def test_channel_pairs_count(self):
        assert len(channel_pairs(np.ones(5, dtype=bool))) == 10


class TestNoiseCovariance:
    def _spectrum(self, data, frame_len=64):
        params = FrameParams(frame_len, frame_len // 2, 16000.0)
        return MultichannelSpectrum(data, params)

    def test_single_frame_rank_one(self, rng):
        data = complex_white(rng, (1, 33, 3))
        with pytest.warns(UserWarning, match="noise context"):
            cov = estimate_noise_covariance(self._spectrum(data))
        np.testing.assert_allclose(
            cov.data, np.einsum("fn,fm->fnm", data[0], data[0].conj()), atol=1e-14
        )
        assert np.linalg.matrix_rank(cov.data[5]) == 1

    def test_empty_context_rejected(self, rng):
        data = complex_white(rng, (4, 33, 3))
        with pytest.raises(ValueError, match="empty"):
            estimate_noise_covariance(self._spectrum(data), context_frames=0)

    def test_converges_to_identity(self):
        # Monte-Carlo oracle: unit complex white noise, 500 frames. A single
        # bin's matrix lands within 0.1 entrywise; the per-entry spread is
        # ~1/sqrt(500), so the all-bin mean error is far tighter.
        rng = np.random.default_rng(4)
        data = complex_white(rng, (500, 9, 3))
        params = FrameParams(16, 8, 16000.0)
        with pytest.warns(UserWarning):
            cov = estimate_noise_covariance(MultichannelSpectrum(data, params))
        err = np.abs(cov.data - np.eye(3)[None])
        assert np.all(err[4] < 0.1)
        assert err.mean() < 0.05

    def test_hermitian_psd(self, rng):
        data = complex_white(rng, (50, 33, 4))
        with pytest.warns(UserWarning):
            cov = estimate_noise_covariance(self._spectrum(data))
        np.testing.assert_allclose(cov.data, cov.data.conj().transpose(0, 2, 1), atol=1e-14)
        assert np.linalg.eigvalsh(cov.data).min() >= -1e-12

    def test_mask_restricts_channels(self, rng):
        data = complex_white(rng, (20, 33, 4))
        with pytest.warns(UserWarning):
            cov = estimate_noise_covariance(self._spectrum(data), mask=[1, 0, 1, 1])
        assert cov.data.shape == (33, 3, 3)
        assert cov.context_frames == 20

    def test_no_warning_inside_recommended_window(self, rng):
        # 16 frames * 512 hop / 16 kHz = 512 ms
        data = complex_white(rng, (16, 513, 2))
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("error")
            estimate_noise_covariance(MultichannelSpectrum(data, FrameParams()))
