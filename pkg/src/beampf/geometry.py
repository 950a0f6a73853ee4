"""Array geometry, plane-wave propagation, and spatial coherence models.

Angle convention: azimuth phi measured in the x-y plane from the x-axis,
elevation theta from the z-axis (colatitude), with (phi, theta) = (90deg, 90deg)
pointing along +y (broadside for an array in the x-z plane).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .validation import check_channel_mask

SPEED_OF_SOUND = 343.0


@dataclass(frozen=True)
class DoA:
    """Far-field direction of arrival in radians."""

    azimuth: float
    elevation: float = math.pi / 2

    def __post_init__(self):
        if not (0.0 <= self.elevation <= math.pi):
            raise ValueError(f"elevation must be in [0, pi], got {self.elevation}")
        object.__setattr__(self, "azimuth", float(self.azimuth) % (2 * math.pi))

    @classmethod
    def from_degrees(cls, azimuth_deg, elevation_deg=90.0):
        return cls(math.radians(azimuth_deg), math.radians(elevation_deg))

    @property
    def azimuth_deg(self):
        return math.degrees(self.azimuth)

    @property
    def elevation_deg(self):
        return math.degrees(self.elevation)

    def unit_vector(self):
        """Cartesian unit vector pointing toward the source."""
        st = math.sin(self.elevation)
        return np.array([st * math.cos(self.azimuth), st * math.sin(self.azimuth), math.cos(self.elevation)])


@dataclass(frozen=True)
class ArrayGeometry:
    """Microphone positions in meters plus the propagation speed."""

    positions: np.ndarray
    speed_of_sound: float = SPEED_OF_SOUND

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=np.float64))
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise ValueError(f"positions must be [N x 3], got shape {pos.shape}")
        if pos.shape[0] < 2:
            raise ValueError(f"need at least 2 microphones, got {pos.shape[0]}")
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions contain non-finite values")
        if self.speed_of_sound <= 0:
            raise ValueError(f"speed_of_sound must be positive, got {self.speed_of_sound}")
        d = pairwise_distances(pos)
        if np.any(d[~np.eye(len(pos), dtype=bool)] <= 0):
            raise ValueError("microphone positions must be pairwise distinct")
        object.__setattr__(self, "positions", pos)

    @property
    def num_channels(self):
        return self.positions.shape[0]

    def distances(self):
        """Pairwise distance matrix [N x N]."""
        return pairwise_distances(self.positions)


def pairwise_distances(positions):
    diff = positions[:, None, :] - positions[None, :, :]
    return np.linalg.norm(diff, axis=-1)


def wavevector(doa, f, c=SPEED_OF_SOUND):
    """Wavevector of a plane wave arriving from ``doa`` at frequency ``f``:

    k = -(2*pi*f/c) * [sin(th)cos(ph), sin(th)sin(ph), cos(th)]
    """
    if f < 0:
        raise ValueError(f"frequency must be >= 0, got {f}")
    if c <= 0:
        raise ValueError(f"speed of sound must be positive, got {c}")
    return -(2 * np.pi * f / c) * doa.unit_vector()


def steering_vector(geom, doa, f):
    """Free-field steering vector exp(-j k.p_n), one unit-magnitude entry per mic."""
    k = wavevector(doa, f, geom.speed_of_sound)
    return np.exp(-1j * geom.positions @ k)


def steering_matrix(geom, doa, freqs):
    """Steering vectors for many frequencies at once, shape [F x N].

    Uses the linearity of the wavevector in f: the phase at frequency f is
    f times the phase at 1 Hz.
    """
    freqs = np.asarray(freqs, dtype=np.float64)
    phase_per_hz = geom.positions @ wavevector(doa, 1.0, geom.speed_of_sound)
    return np.exp(-1j * np.outer(freqs, phase_per_hz))


def direct_coherence(tdoa, f):
    """Coherence of a pure plane wave between two mics with time difference ``tdoa``."""
    return np.exp(1j * 2 * np.pi * np.asarray(f, dtype=np.float64) * tdoa)


def diffuse_coherence(d, f, c=SPEED_OF_SOUND):
    """Spherically isotropic field coherence sinc(2*pi*f*d/c), unnormalized sinc.

    np.sinc is the normalized sin(pi x)/(pi x), hence the argument rescaling.
    """
    if np.any(np.asarray(d) < 0):
        raise ValueError("microphone spacing must be >= 0")
    return np.sinc(2.0 * np.asarray(f, dtype=np.float64) * d / c)


def diffuse_coherence_matrix(geom, f, mask=None):
    """Diffuse-field coherence matrix over active channels, [Na x Na], unit diagonal."""
    mask = check_channel_mask(mask, geom.num_channels, min_active=2)
    d = geom.distances()[np.ix_(mask, mask)]
    return diffuse_coherence(d, f, geom.speed_of_sound)


def diffuse_coherence_matrices(geom, freqs, mask=None):
    """Diffuse coherence matrices for all ``freqs`` at once, [F x Na x Na]."""
    mask = check_channel_mask(mask, geom.num_channels, min_active=2)
    d = geom.distances()[np.ix_(mask, mask)]
    freqs = np.asarray(freqs, dtype=np.float64)
    return np.sinc(2.0 * freqs[:, None, None] * d[None, :, :] / geom.speed_of_sound)
