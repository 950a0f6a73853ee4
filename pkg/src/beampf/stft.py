"""STFT analysis/synthesis with half-overlapping sine windows.

The sine window sin(pi*(k+0.5)/K) applied on both analysis and synthesis
sides sums to unity at 50% overlap (sin^2 + cos^2), so a roundtrip through
``analyze`` and ``synthesize`` reconstructs every sample that is covered by
two frames. Only the first and last half-frame lack a partner and carry a
window-shaped taper.
"""

from dataclasses import dataclass, field

import numpy as np

from .validation import check_signal, check_spectrum_matrix


def sine_window(frame_len):
    """Periodic sine window sin(pi*(k+0.5)/K), k = 0..K-1."""
    k = np.arange(frame_len)
    return np.sin(np.pi * (k + 0.5) / frame_len)


@dataclass(frozen=True)
class FrameParams:
    """Framing parameters for STFT block processing.

    hop must equal frame_len/2: the sine analysis/synthesis pair only
    achieves constant overlap-add at half overlap.
    """

    frame_len: int = 1024
    hop: int = 512
    sample_rate: float = 16000.0

    def __post_init__(self):
        if self.frame_len < 2 or self.frame_len % 2 != 0:
            raise ValueError(f"frame_len must be even and >= 2, got {self.frame_len}")
        if self.hop * 2 != self.frame_len:
            raise ValueError(
                f"hop must be frame_len/2 (sine-window overlap-add), got hop={self.hop}, frame_len={self.frame_len}"
            )
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")

    @property
    def num_bins(self):
        return self.frame_len // 2 + 1

    def bin_frequencies(self):
        """Center frequency in Hz of each one-sided spectrum bin."""
        return np.arange(self.num_bins) * self.sample_rate / self.frame_len

    def num_frames(self, num_samples):
        """Frames needed to cover ``num_samples``; the last frame may be zero-padded."""
        if num_samples < self.frame_len:
            raise ValueError(
                f"signal of {num_samples} samples is shorter than one frame ({self.frame_len})"
            )
        return 1 + int(np.ceil((num_samples - self.frame_len) / self.hop))

    def frame_center_times(self, num_frames):
        """Center time in seconds of each frame."""
        return (np.arange(num_frames) * self.hop + self.frame_len / 2) / self.sample_rate


@dataclass
class MultichannelSpectrum:
    """Complex STFT tensor [frames x bins x channels] plus its framing parameters."""

    data: np.ndarray
    params: FrameParams = field(default_factory=FrameParams)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.complex128)
        if self.data.ndim != 3:
            raise ValueError(f"spectrum data must be [frames x bins x channels], got ndim={self.data.ndim}")
        if self.data.shape[1] != self.params.num_bins:
            raise ValueError(
                f"spectrum has {self.data.shape[1]} bins, frame_len={self.params.frame_len} implies {self.params.num_bins}"
            )

    @property
    def num_frames(self):
        return self.data.shape[0]

    @property
    def num_bins(self):
        return self.data.shape[1]

    @property
    def num_channels(self):
        return self.data.shape[2]

    def channel(self, n):
        """Single-channel view [frames x bins]."""
        return self.data[:, :, n]


def analyze(signal, params=None):
    """Transform multichannel audio to the STFT domain.

    Parameters
    ----------
    signal : array [samples] or [samples x channels]
    params : FrameParams

    Returns
    -------
    MultichannelSpectrum with data [frames x bins x channels].

    Frame l covers samples [l*hop, l*hop + frame_len); a trailing partial
    frame is zero-padded.
    """
    params = params or FrameParams()
    signal = check_signal(signal)
    num_samples, num_channels = signal.shape
    num_frames = params.num_frames(num_samples)

    padded_len = (num_frames - 1) * params.hop + params.frame_len
    if padded_len > num_samples:
        pad = np.zeros((padded_len - num_samples, num_channels))
        signal = np.concatenate([signal, pad], axis=0)

    idx = np.arange(params.frame_len)[None, :] + params.hop * np.arange(num_frames)[:, None]
    frames = signal[idx]  # [L, K, N]
    frames = frames * sine_window(params.frame_len)[None, :, None]
    data = np.fft.rfft(frames, axis=1)
    return MultichannelSpectrum(data, params)


def synthesize(spectrum, params=None):
    """Inverse transform of a single-channel STFT matrix by windowed overlap-add.

    Parameters
    ----------
    spectrum : complex array [frames x bins]
    params : FrameParams

    Returns
    -------
    Real signal of length (frames-1)*hop + frame_len.
    """
    params = params or FrameParams()
    spectrum = check_spectrum_matrix(spectrum)
    num_frames, num_bins = spectrum.shape
    if num_bins != params.num_bins:
        raise ValueError(f"spectrum has {num_bins} bins, frame_len={params.frame_len} implies {params.num_bins}")

    frames = np.fft.irfft(spectrum, n=params.frame_len, axis=1)
    frames *= sine_window(params.frame_len)[None, :]

    out = np.zeros((num_frames - 1) * params.hop + params.frame_len)
    idx = np.arange(params.frame_len)[None, :] + params.hop * np.arange(num_frames)[:, None]
    np.add.at(out, idx.ravel(), frames.ravel())
    return out
