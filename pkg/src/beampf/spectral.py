"""Recursive auto-/cross-power spectral estimation and noise-covariance estimation.

The running spectra follow Phi(l) = lambda*Phi(l-1) + (1-lambda)*x(l)x(l)^H per
bin, hard-initialized with the first frame's outer product, so Phi stays an
unbiased scale of the PSD for stationary input.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .validation import check_channel_mask

DEFAULT_FORGETTING = 0.68


def channel_pairs(mask):
    """Unordered index pairs (n, m), n < m, over active channels of a boolean mask."""
    active = np.flatnonzero(np.asarray(mask, dtype=bool))
    return [(int(n), int(m)) for i, n in enumerate(active) for m in active[i + 1:]]


class SpectralAccumulator:
    """Recursively averaged auto/cross power spectra, [bins x N x N].

    Single-writer: frames must be fed in order via :meth:`accumulate`.
    """

    def __init__(self, num_bins, num_channels, forgetting=DEFAULT_FORGETTING):
        if not (0.0 <= forgetting < 1.0):
            raise ValueError(f"forgetting factor must be in [0, 1), got {forgetting}")
        self.forgetting = forgetting
        self.psd = np.zeros((num_bins, num_channels, num_channels), dtype=np.complex128)
        self.frame_count = 0

    @property
    def num_bins(self):
        return self.psd.shape[0]

    @property
    def num_channels(self):
        return self.psd.shape[1]

    def accumulate(self, frame):
        """Fold one STFT frame [bins x N] into the running spectra. Returns self."""
        frame = np.asarray(frame, dtype=np.complex128)
        if frame.shape != (self.num_bins, self.num_channels):
            raise ValueError(
                f"frame has shape {frame.shape}, expected {(self.num_bins, self.num_channels)}"
            )
        outer = np.einsum("fn,fm->fnm", frame, np.conj(frame))
        if self.frame_count == 0:
            self.psd[:] = outer
        else:
            lam = self.forgetting
            self.psd *= lam
            self.psd += (1.0 - lam) * outer
        self.frame_count += 1
        return self

    def coherence(self, n, m):
        """Short-time coherence Phi_nm / sqrt(Phi_nn * Phi_mm) per bin.

        Bins where an auto-spectrum is zero are marked NaN; consumers skip them.
        """
        if self.frame_count == 0:
            raise ValueError("no frames accumulated")
        auto_n = np.real(self.psd[:, n, n])
        auto_m = np.real(self.psd[:, m, m])
        denom = np.sqrt(auto_n * auto_m)
        with np.errstate(invalid="ignore", divide="ignore"):
            gamma = np.where(denom > 0, self.psd[:, n, m] / np.where(denom > 0, denom, 1.0), np.nan + 0j)
        return gamma


def pairwise_coherence_track(data, forgetting=DEFAULT_FORGETTING, mask=None):
    """Short-time coherence of every active channel pair along a whole utterance.

    Parameters
    ----------
    data : complex array [frames x bins x channels]
    forgetting : recursive-averaging factor lambda
    mask : optional boolean channel mask

    Returns
    -------
    gammas : complex array [frames x bins x num_pairs]
    pairs : list of (n, m) channel index pairs matching the last axis
    """
    data = np.asarray(data, dtype=np.complex128)
    if data.ndim != 3:
        raise ValueError(f"data must be [frames x bins x channels], got ndim={data.ndim}")
    num_frames, num_bins, num_channels = data.shape
    mask = check_channel_mask(mask, num_channels, min_active=2)
    pairs = channel_pairs(mask)
    n_idx = np.array([p[0] for p in pairs])
    m_idx = np.array([p[1] for p in pairs])

    lam = forgetting
    auto = np.abs(data[0]) ** 2  # [F, N]
    cross = data[0, :, n_idx].T * np.conj(data[0, :, m_idx].T)  # [F, P]
    gammas = np.empty((num_frames, num_bins, len(pairs)), dtype=np.complex128)

    for l in range(num_frames):
        if l > 0:
            frame = data[l]
            auto = lam * auto + (1.0 - lam) * np.abs(frame) ** 2
            cross = lam * cross + (1.0 - lam) * frame[:, n_idx] * np.conj(frame[:, m_idx])
        denom = np.sqrt(auto[:, n_idx] * auto[:, m_idx])
        with np.errstate(invalid="ignore", divide="ignore"):
            gammas[l] = np.where(denom > 0, cross / np.where(denom > 0, denom, 1.0), np.nan + 0j)
    return gammas, pairs


@dataclass
class NoiseCovariance:
    """Per-bin spatio-spectral noise covariance over active channels.

    data is [bins x Na x Na], Hermitian PSD by construction (mean of outer
    products of context frames).
    """

    data: np.ndarray
    mask: np.ndarray
    context_frames: int

    @property
    def num_bins(self):
        return self.data.shape[0]

    @property
    def num_active(self):
        return self.data.shape[1]


def estimate_noise_covariance(spectrum, mask=None, context_frames=None):
    """Average outer-product noise covariance from a pre-utterance context.

    Parameters
    ----------
    spectrum : MultichannelSpectrum holding the context frames
    mask : optional boolean channel mask; excluded channels are dropped
    context_frames : optionally restrict to the first so-many frames

    A context much shorter or longer than the recommended 400-800 ms window
    triggers a warning, not an error.
    """
    data = spectrum.data
    if context_frames is not None:
        data = data[:context_frames]
    if data.shape[0] == 0:
        raise ValueError("noise context is empty")
    mask = check_channel_mask(mask, data.shape[2], min_active=1)
    data = data[:, :, mask]

    duration = data.shape[0] * spectrum.params.hop / spectrum.params.sample_rate
    if not (0.4 <= duration <= 0.8):
        warnings.warn(
            f"noise context of {duration:.3f} s is outside the recommended 400-800 ms range",
            stacklevel=2,
        )

    s_nn = np.einsum("lfn,lfm->fnm", data, np.conj(data)) / data.shape[0]
    return NoiseCovariance(data=s_nn, mask=mask, context_frames=data.shape[0])
