"""Coherent-to-diffuse power ratio estimation and beamformer-output correction.

The pair estimator needs only the measured coherence and the diffuse-field
coherence of the pair, not the source direction. Per-pair estimates are
fused by averaging diffuseness (not CDR) across pairs, and the input-side
estimate is mapped to the beamformer output through the diffuse-power
transfer factor of the weights.
"""

from dataclasses import dataclass

import numpy as np

from .geometry import diffuse_coherence_matrices

CDR_MAX = 1e4
COHERENCE_CLIP = 1.0 - 1e-9
A_GAMMA_FLOOR = 1e-6


def estimate_cdr_pair(gamma_x, gamma_n, cdr_max=CDR_MAX):
    """DoA-independent CDR estimate for one microphone pair.

    Parameters
    ----------
    gamma_x : complex measured coherence (scalar or array)
    gamma_n : real diffuse-field coherence of the pair, broadcastable

    Returns
    -------
    Nonnegative CDR clamped to [0, cdr_max].

    Finite-sample coherence can leave the model manifold, so the square-root
    operand is clamped at zero and |gamma_x| is clipped just inside 1 to stay
    off the estimator's pole.
    """
    gamma_x = np.asarray(gamma_x, dtype=np.complex128)
    gamma_n = np.asarray(gamma_n, dtype=np.float64)

    mag = np.abs(gamma_x)
    scale = np.where(mag > COHERENCE_CLIP, COHERENCE_CLIP / np.maximum(mag, COHERENCE_CLIP), 1.0)
    gamma_x = gamma_x * scale

    re = np.real(gamma_x)
    mag2 = np.real(gamma_x) ** 2 + np.imag(gamma_x) ** 2
    operand = gamma_n**2 * re**2 - gamma_n**2 * mag2 + gamma_n**2 - 2 * gamma_n * re + mag2
    num = gamma_n * re - mag2 - np.sqrt(np.maximum(operand, 0.0))
    with np.errstate(invalid="ignore", divide="ignore"):
        cdr = num / (mag2 - 1.0)
    cdr = np.where(np.isnan(gamma_x), np.nan, cdr)
    return np.clip(cdr, 0.0, cdr_max)


def diffuseness(cdr):
    """Diffuse power fraction D = 1/(1 + CDR), in (0, 1] for finite CDR >= 0."""
    return 1.0 / (1.0 + np.asarray(cdr, dtype=np.float64))


def average_input_cdr(pair_cdrs, cdr_max=CDR_MAX):
    """Fuse per-pair CDR estimates into one input-side estimate.

    Parameters
    ----------
    pair_cdrs : array [..., num_pairs]; NaN entries mark pairs invalid at
        that time-frequency point (zero auto-spectrum) and are skipped.

    Returns
    -------
    (mean_diffuseness, cdr_in) with cdr_in = (1 - D)/D clamped to [0, cdr_max].

    Points where every pair is invalid have zero signal; they are treated as
    fully diffuse (D = 1, CDR 0) so downstream gains fall to the floor.
    """
    pair_cdrs = np.asarray(pair_cdrs, dtype=np.float64)
    if pair_cdrs.ndim == 0 or pair_cdrs.shape[-1] == 0:
        raise ValueError("need at least one microphone pair")
    d = diffuseness(pair_cdrs)
    valid = ~np.isnan(d)
    count = valid.sum(axis=-1)
    if not np.any(count):
        raise ValueError("no valid pair at any time-frequency point")
    d_mean = np.where(count > 0, np.where(valid, d, 0.0).sum(axis=-1) / np.maximum(count, 1), 1.0)
    cdr_in = np.clip((1.0 - d_mean) / d_mean, 0.0, cdr_max)
    return d_mean, cdr_in


def correction_factor(weights, geom, freqs):
    """Diffuse-power transfer of the beamformer, a(f) = w^H J_diff(f) w.

    J_diff is real symmetric, so the quadratic form is real; a residual
    imaginary part beyond rounding noise indicates an internal inconsistency.
    The result is floored at a small positive value before it is used as a
    divisor.
    """
    j_diff = diffuse_coherence_matrices(geom, freqs, weights.active_mask)
    quad = np.einsum("fn,fnm,fm->f", np.conj(weights.w), j_diff, weights.w)
    tol = 1e-9 * np.maximum(np.abs(np.real(quad)), 1e-30)
    if np.any(np.abs(np.imag(quad)) > tol):
        raise ValueError("diffuse quadratic form is not real: inconsistent weights or geometry")
    return np.maximum(np.real(quad), A_GAMMA_FLOOR)


def cdr_at_beamformer_output(cdr_in, a_gamma, cdr_max=CDR_MAX):
    """Map the input-side CDR through the beamformer: CDR_BF = CDR_In / a."""
    a_gamma = np.asarray(a_gamma, dtype=np.float64)
    if np.any(a_gamma <= 0):
        raise ValueError("correction factor must be positive")
    return np.clip(np.asarray(cdr_in, dtype=np.float64) / a_gamma, 0.0, cdr_max)


@dataclass
class CdrEstimate:
    """CDR and companion diffuseness matrices, both [frames x bins]."""

    cdr: np.ndarray
    diffuseness: np.ndarray

    @classmethod
    def from_cdr(cls, cdr):
        cdr = np.asarray(cdr, dtype=np.float64)
        return cls(cdr=cdr, diffuseness=diffuseness(cdr))
