"""MVDR weight computation and application with failing-channel exclusion."""

from dataclasses import dataclass

import numpy as np

DEFAULT_LOADING = 1e-3
CONSTRAINT_TOL = 1e-8


@dataclass
class BeamformerWeights:
    """Per-bin complex weights over active channels.

    w is [bins x Na]; active_mask maps the Na columns back to array channels.
    Weights satisfy w^H d = 1 per bin (checked by the solver that built them).
    """

    w: np.ndarray
    active_mask: np.ndarray
    doa: object = None

    @property
    def num_bins(self):
        return self.w.shape[0]

    @property
    def num_active(self):
        return self.w.shape[1]

    def full(self):
        """Weights expanded to all channels, zeros at excluded ones, [bins x N]."""
        out = np.zeros((self.num_bins, self.active_mask.size), dtype=np.complex128)
        out[:, self.active_mask] = self.w
        return out


def mvdr_weights(noise_cov, steering, loading=DEFAULT_LOADING, doa=None):
    """Distortionless minimum-noise-power weights per bin.

    Solves w = R^-1 d / (d^H R^-1 d) with R = S_nn + loading*tr(S_nn)/Na * I
    over the active channels of ``noise_cov``; excluded channels get zero
    weight via :meth:`BeamformerWeights.full`.

    Parameters
    ----------
    noise_cov : NoiseCovariance, [bins x Na x Na]
    steering : complex array [bins x N] for the full array (masked internally)
    loading : diagonal loading relative to the mean eigenvalue; 0 recovers the
        plain inverse and requires S_nn to be well-conditioned
    doa : carried along as metadata

    Raises
    ------
    ValueError if the (regularized) covariance cannot be inverted or the
    distortionless constraint is violated; raising ``loading`` fixes
    rank-deficient contexts.
    """
    mask = noise_cov.mask
    if int(mask.sum()) < 2:
        raise ValueError("MVDR needs at least 2 active channels")
    steering = np.asarray(steering, dtype=np.complex128)
    if steering.ndim != 2 or steering.shape[0] != noise_cov.num_bins:
        raise ValueError(
            f"steering must be [bins x N] with {noise_cov.num_bins} bins, got {steering.shape}"
        )
    d = steering[:, mask]  # [F, Na]
    s_nn = noise_cov.data
    num_active = d.shape[1]

    r = s_nn
    if loading != 0.0:
        scale = np.real(np.trace(s_nn, axis1=1, axis2=2)) / num_active
        r = s_nn + (loading * scale)[:, None, None] * np.eye(num_active)

    try:
        numerator = np.linalg.solve(r, d[:, :, None])[:, :, 0]  # R^-1 d
    except np.linalg.LinAlgError as exc:
        raise ValueError(
            f"noise covariance is singular ({exc}); raise the diagonal loading"
        ) from exc
    denom = np.einsum("fn,fn->f", np.conj(d), numerator)
    with np.errstate(invalid="ignore", divide="ignore"):
        w = numerator / denom[:, None]

    if not np.all(np.isfinite(w)):
        raise ValueError("MVDR solve produced non-finite weights; raise the diagonal loading")
    constraint = np.einsum("fn,fn->f", np.conj(w), d)
    err = np.max(np.abs(constraint - 1.0))
    if err > CONSTRAINT_TOL:
        raise ValueError(
            f"distortionless constraint violated by {err:.2e}; raise the diagonal loading"
        )
    return BeamformerWeights(w=w, active_mask=mask.copy(), doa=doa)


def apply_beamformer(weights, spectrum):
    """Beamformer output Y(l,f) = w^H(f) x(l,f), shape [frames x bins]."""
    data = spectrum.data
    if data.shape[2] != weights.active_mask.size:
        raise ValueError(
            f"spectrum has {data.shape[2]} channels, weights expect {weights.active_mask.size}"
        )
    if data.shape[1] != weights.num_bins:
        raise ValueError(f"spectrum has {data.shape[1]} bins, weights have {weights.num_bins}")
    return np.einsum("fn,lfn->lf", np.conj(weights.w), data[:, :, weights.active_mask])
