"""scikit-learn style estimator wrapping the full enhancement chain.

``fit`` learns the per-utterance quantities from a multichannel recording
whose head is noise-only: look direction, noise covariance, MVDR weights,
and the diffuse-power correction of those weights. ``transform`` runs
STFT -> beamformer -> CDR postfilter -> overlap-add on a recording and
returns the enhanced mono signal. Both accept arrays shaped
[samples x channels], so the estimator composes with sklearn pipelines.
"""

import time
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from . import beamforming, cdr, localization, postfilter, spectral, stft
from .geometry import ArrayGeometry, DoA, diffuse_coherence, steering_matrix
from .validation import check_channel_mask, check_signal


@dataclass
class EnhancementResult:
    """Everything one pass produces, for exports and diagnostics."""

    signal: np.ndarray  # enhanced mono, same length as the input
    beamformed: np.ndarray  # Y_BF(l,f)
    enhanced_spectrum: np.ndarray  # Y(l,f) = G * Y_BF
    gain: np.ndarray  # G(l,f)
    diffuseness: np.ndarray  # D_BF(l,f) = 1/(1 + CDR_BF)
    cdr_bf: np.ndarray
    cdr_in: np.ndarray
    timings: dict


class CoherenceEnhancer(BaseEstimator, TransformerMixin):
    """MVDR beamformer plus coherence-driven Wiener postfilter.

    Parameters
    ----------
    geometry : ArrayGeometry (required before fit)
    doa : DoA look direction; None means localize with SRP-PHAT during fit
    noise_context : seconds of noise-only signal at the start of the fitted
        recording, or an explicit (start_s, end_s) interval
    frame_len : STFT frame length in samples (hop is frame_len/2)
    sample_rate : Hz
    forgetting : recursive-averaging factor for the coherence track
    mu, g_min : Wiener postfilter overestimation factor and gain floor;
        mu = 0 disables the postfilter
    diagonal_loading : MVDR covariance regularization relative to the mean
        eigenvalue
    cdr_max : cap applied to every CDR estimate
    channel_mask : boolean per-channel mask; failing microphones are False
    localization_grid : DoAGrid for SRP-PHAT (default planar 5-degree sweep)
    srp_freq_range : (lo_hz, hi_hz) scoring band for SRP-PHAT
    beamformer : "mvdr", or "passthrough" to forward one channel unprocessed
        (with mu = 0 this reduces the whole chain to an STFT roundtrip)
    reference_channel : channel forwarded in passthrough mode
    """

    def __init__(
        self,
        geometry=None,
        doa=None,
        noise_context=0.5,
        frame_len=1024,
        sample_rate=16000.0,
        forgetting=spectral.DEFAULT_FORGETTING,
        mu=1.3,
        g_min=0.1,
        diagonal_loading=beamforming.DEFAULT_LOADING,
        cdr_max=cdr.CDR_MAX,
        channel_mask=None,
        localization_grid=None,
        srp_freq_range=localization.DEFAULT_FREQ_RANGE,
        beamformer="mvdr",
        reference_channel=0,
    ):
        self.geometry = geometry
        self.doa = doa
        self.noise_context = noise_context
        self.frame_len = frame_len
        self.sample_rate = sample_rate
        self.forgetting = forgetting
        self.mu = mu
        self.g_min = g_min
        self.diagonal_loading = diagonal_loading
        self.cdr_max = cdr_max
        self.channel_mask = channel_mask
        self.localization_grid = localization_grid
        self.srp_freq_range = srp_freq_range
        self.beamformer = beamformer
        self.reference_channel = reference_channel

    # ------------------------------------------------------------------ #

    def _frame_params(self):
        return stft.FrameParams(self.frame_len, self.frame_len // 2, self.sample_rate)

    def _context_frame_range(self, num_frames, params):
        """Frame indices fully inside the noise-context interval."""
        if np.isscalar(self.noise_context):
            start_s, end_s = 0.0, float(self.noise_context)
        else:
            start_s, end_s = map(float, self.noise_context)
        if end_s <= start_s:
            raise ValueError(f"empty noise-context interval ({start_s}, {end_s})")
        first = int(np.ceil(start_s * params.sample_rate / params.hop))
        last = int(np.floor((end_s * params.sample_rate - params.frame_len) / params.hop)) + 1
        first, last = max(first, 0), min(last, num_frames)
        if last <= first:
            raise ValueError(
                f"noise-context interval ({start_s} s, {end_s} s) holds no complete frame"
            )
        return first, last

    def fit(self, X, y=None):
        """Learn look direction, noise covariance, and MVDR weights from ``X``.

        X : array [samples x channels] whose configured noise-context
        interval contains noise only.
        """
        if self.geometry is None:
            raise ValueError("geometry must be set before fit")
        if not isinstance(self.geometry, ArrayGeometry):
            raise ValueError("geometry must be an ArrayGeometry")
        X = check_signal(X, min_channels=2)
        if X.shape[1] != self.geometry.num_channels:
            raise ValueError(
                f"signal has {X.shape[1]} channels, geometry has {self.geometry.num_channels}"
            )
        mask = check_channel_mask(self.channel_mask, X.shape[1], min_active=2)
        params = self._frame_params()
        freqs = params.bin_frequencies()

        if self.beamformer == "passthrough":
            active = np.flatnonzero(mask)
            if self.reference_channel not in active:
                raise ValueError(f"reference channel {self.reference_channel} is masked out")
            w = np.zeros((params.num_bins, active.size), dtype=np.complex128)
            w[:, int(np.where(active == self.reference_channel)[0][0])] = 1.0
            weights = beamforming.BeamformerWeights(w=w, active_mask=mask.copy())
            doa, noise_cov, steering = None, None, None
            self.srp_scores_ = None
        elif self.beamformer == "mvdr":
            spectrum = stft.analyze(X, params)
            if self.doa is not None:
                doa = self.doa if isinstance(self.doa, DoA) else DoA(*self.doa)
                self.srp_scores_ = None
            else:
                result = localization.srp_phat(
                    spectrum,
                    self.geometry,
                    grid=self.localization_grid,
                    mask=mask,
                    freq_range=self.srp_freq_range,
                )
                doa = result.doa
                self.srp_scores_ = result.scores

            first, last = self._context_frame_range(spectrum.num_frames, params)
            context = stft.MultichannelSpectrum(spectrum.data[first:last], params)
            noise_cov = spectral.estimate_noise_covariance(context, mask=mask)
            steering = steering_matrix(self.geometry, doa, freqs)
            weights = beamforming.mvdr_weights(
                noise_cov, steering, loading=self.diagonal_loading, doa=doa
            )
        else:
            raise ValueError(f"unknown beamformer mode {self.beamformer!r}")

        self.doa_ = doa
        self.mask_ = mask
        self.noise_cov_ = noise_cov
        self.steering_ = steering
        self.weights_ = weights
        self.a_gamma_ = cdr.correction_factor(weights, self.geometry, freqs)
        self.n_channels_ = X.shape[1]
        return self

    def _check_fitted(self):
        if not hasattr(self, "weights_"):
            raise ValueError("estimator is not fitted; call fit first")

    def enhance(self, X):
        """Run the full chain on ``X`` and return the detailed result."""
        self._check_fitted()
        X = check_signal(X, min_channels=2)
        if X.shape[1] != self.n_channels_:
            raise ValueError(f"signal has {X.shape[1]} channels, fitted for {self.n_channels_}")
        params = self._frame_params()
        timings = {}

        t0 = time.perf_counter()
        spectrum = stft.analyze(X, params)
        timings["stft"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        y_bf = beamforming.apply_beamformer(self.weights_, spectrum)
        timings["beamformer"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        cdr_bf, cdr_in = self._estimate_cdr(spectrum)
        timings["cdr"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        pf = postfilter.PostfilterParams(self.mu, self.g_min)
        gain = postfilter.wiener_gain(cdr_bf, pf)
        y = postfilter.apply_gain(y_bf, gain)
        timings["postfilter"] = time.perf_counter() - t0

        t0 = time.perf_counter()
        out = stft.synthesize(y, params)[: X.shape[0]]
        timings["synthesis"] = time.perf_counter() - t0

        return EnhancementResult(
            signal=out,
            beamformed=y_bf,
            enhanced_spectrum=y,
            gain=gain,
            diffuseness=cdr.diffuseness(cdr_bf),
            cdr_bf=cdr_bf,
            cdr_in=cdr_in,
            timings=timings,
        )

    def _estimate_cdr(self, spectrum):
        """Input CDR from pairwise coherence, corrected to the beamformer output."""
        gammas, pairs = spectral.pairwise_coherence_track(
            spectrum.data, self.forgetting, self.mask_
        )
        freqs = spectrum.params.bin_frequencies()
        dists = self.geometry.distances()
        gamma_n = np.stack(
            [diffuse_coherence(dists[n, m], freqs, self.geometry.speed_of_sound) for n, m in pairs],
            axis=1,
        )  # [F, P]
        pair_cdr = cdr.estimate_cdr_pair(gammas, gamma_n[None, :, :], self.cdr_max)
        _, cdr_in = cdr.average_input_cdr(pair_cdr, self.cdr_max)
        cdr_bf = cdr.cdr_at_beamformer_output(cdr_in, self.a_gamma_[None, :], self.cdr_max)
        return cdr_bf, cdr_in

    def transform(self, X):
        """Enhanced mono signal for ``X``, shape [samples]."""
        return self.enhance(X).signal
