"""SRP-PHAT grid search for the beamformer look direction."""

from dataclasses import dataclass, field

import numpy as np

from .geometry import DoA
from .spectral import channel_pairs
from .validation import check_channel_mask

DEFAULT_FREQ_RANGE = (125.0, 3500.0)


@dataclass(frozen=True)
class DoAGrid:
    """Candidate directions as the cross product of azimuth and elevation lists (degrees)."""

    azimuths_deg: np.ndarray
    elevations_deg: np.ndarray = field(default_factory=lambda: np.array([90.0]))

    def __post_init__(self):
        az = np.atleast_1d(np.asarray(self.azimuths_deg, dtype=np.float64))
        el = np.atleast_1d(np.asarray(self.elevations_deg, dtype=np.float64))
        if az.size == 0 or el.size == 0:
            raise ValueError("grid must contain at least one azimuth and one elevation")
        object.__setattr__(self, "azimuths_deg", az)
        object.__setattr__(self, "elevations_deg", el)

    @classmethod
    def planar(cls, azimuth_step_deg=5.0, elevation_deg=90.0, azimuth_range=(0.0, 360.0)):
        """Azimuth sweep at fixed elevation; default 0..355 deg in 5 deg steps."""
        if azimuth_step_deg <= 0:
            raise ValueError("azimuth step must be positive")
        lo, hi = azimuth_range
        return cls(np.arange(lo, hi, azimuth_step_deg), np.array([elevation_deg]))

    @property
    def shape(self):
        return (self.elevations_deg.size, self.azimuths_deg.size)

    def candidates(self):
        """DoAs in row-major (elevation, azimuth) order, matching the score matrix."""
        return [
            DoA.from_degrees(az, el)
            for el in self.elevations_deg
            for az in self.azimuths_deg
        ]


@dataclass
class SrpResult:
    doa: DoA
    scores: np.ndarray  # [n_elevations x n_azimuths]
    grid: DoAGrid


def srp_phat(spectrum, geom, grid=None, mask=None, freq_range=DEFAULT_FREQ_RANGE):
    """Steered-response-power localization with phase-transform weighting.

    Scores each grid direction by the real part of the PHAT-normalized
    cross-spectra re-phased to that direction, summed over frames, bins in
    ``freq_range``, and unordered active-channel pairs. Ties resolve to the
    smallest grid index, so the search is deterministic.
    """
    grid = grid or DoAGrid.planar()
    mask = check_channel_mask(mask, geom.num_channels, min_active=2)
    data = spectrum.data
    if data.shape[0] < 1:
        raise ValueError("need at least one frame")

    freqs = spectrum.params.bin_frequencies()
    band = (freqs >= freq_range[0]) & (freqs <= freq_range[1])
    if not np.any(band):
        raise ValueError(f"no frequency bins inside {freq_range}")
    freqs = freqs[band]

    pairs = channel_pairs(mask)
    n_idx = np.array([p[0] for p in pairs])
    m_idx = np.array([p[1] for p in pairs])

    # PHAT weighting: keep phase only, then sum over frames. Bins where the
    # cross power vanishes carry no phase information and contribute zero.
    cross = data[:, band, :][:, :, n_idx] * np.conj(data[:, band, :][:, :, m_idx])  # [L, Fb, P]
    mag = np.abs(cross)
    if not np.any(mag > 0):
        raise ValueError("all-zero spectrum: PHAT normalization undefined")
    phat = np.where(mag > 0, cross / np.where(mag > 0, mag, 1.0), 0.0)
    cc = phat.sum(axis=0)  # [Fb, P]

    baselines = geom.positions[n_idx] - geom.positions[m_idx]  # [P, 3]
    scores = np.empty(grid.shape[0] * grid.shape[1])
    for g, cand in enumerate(grid.candidates()):
        # exp(j k^T (p_n - p_m)) with k = -(2 pi f / c) u
        tau = baselines @ cand.unit_vector() / geom.speed_of_sound  # [P]
        phase = np.exp(-2j * np.pi * np.outer(freqs, tau))  # [Fb, P]
        scores[g] = np.sum(np.real(cc * phase))

    best = int(np.argmax(scores))
    return SrpResult(
        doa=grid.candidates()[best],
        scores=scores.reshape(grid.shape),
        grid=grid,
    )
