"""CDR-driven Wiener postfilter gains."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PostfilterParams:
    """Overestimation factor and gain floor. mu = 0 disables the filter (G = 1)."""

    mu: float = 1.3
    g_min: float = 0.1

    def __post_init__(self):
        if self.mu < 0:
            raise ValueError(f"overestimation factor must be >= 0, got {self.mu}")
        if not (0.0 < self.g_min < 1.0):
            raise ValueError(f"gain floor must be in (0, 1), got {self.g_min}")

    def gain_threshold(self):
        """SNR above which the gain rises off the floor: mu/(1 - g_min) - 1."""
        return self.mu / (1.0 - self.g_min) - 1.0


@dataclass
class GainMask:
    """Real spectral gains [frames x bins], bounded to [g_min, 1]."""

    g: np.ndarray


def wiener_gain(snr, params=None):
    """Wiener gain G = max(1 - mu/(1 + snr), g_min), nondecreasing in snr."""
    params = params or PostfilterParams()
    snr = np.asarray(snr, dtype=np.float64)
    return np.maximum(1.0 - params.mu / (1.0 + snr), params.g_min)


def apply_gain(y_bf, gain):
    """Elementwise spectral gain; the phase of y_bf is untouched."""
    y_bf = np.asarray(y_bf)
    g = gain.g if isinstance(gain, GainMask) else np.asarray(gain)
    if g.shape != y_bf.shape:
        raise ValueError(f"gain shape {g.shape} does not match spectrum shape {y_bf.shape}")
    return g * y_bf
