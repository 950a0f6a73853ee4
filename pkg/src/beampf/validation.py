"""Input-validation helpers shared across the package."""

import numpy as np


def check_signal(x, min_channels=1, name="signal"):
    """Validate a time-domain signal array and return it as float64 [samples x channels].

    One-dimensional input is promoted to a single-channel column.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ValueError(f"{name} must be 1-D or [samples x channels], got ndim={x.ndim}")
    if x.shape[0] == 0:
        raise ValueError(f"{name} is empty")
    if x.shape[1] < min_channels:
        raise ValueError(f"{name} has {x.shape[1]} channel(s), need at least {min_channels}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite values")
    return x


def check_channel_mask(mask, num_channels, min_active=1):
    """Normalize a channel mask to a boolean vector of length ``num_channels``.

    ``mask=None`` means all channels active.
    """
    if mask is None:
        return np.ones(num_channels, dtype=bool)
    mask = np.asarray(mask)
    if mask.shape != (num_channels,):
        raise ValueError(f"channel mask has shape {mask.shape}, expected ({num_channels},)")
    mask = mask.astype(bool)
    active = int(mask.sum())
    if active < min_active:
        raise ValueError(f"channel mask leaves {active} active channel(s), need at least {min_active}")
    return mask


def check_spectrum_matrix(spec, name="spectrum"):
    """Validate a single-channel complex STFT matrix [frames x bins]."""
    spec = np.asarray(spec)
    if spec.ndim != 2:
        raise ValueError(f"{name} must be [frames x bins], got ndim={spec.ndim}")
    return spec.astype(np.complex128, copy=False)
