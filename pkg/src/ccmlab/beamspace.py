"""ULA steering vectors, DFT beams and the fixed angle-sector plan.

The array is a uniform linear array with half-wavelength spacing, so the
response to a plane wave from angle ``phi`` is the unit-norm steering vector
with per-element phase progression ``pi * sin(phi)``.  Selected columns of the
N x N DFT matrix coincide with steering vectors at specific (non-uniformly
spaced) angles; those columns form the per-sector analog beamforming codebook.

Angles are degrees at every public boundary and are converted to radians
exactly once, inside :func:`steering_matrix`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

N_SECTORS = 8
SECTOR_WIDTH_DEG = 11.25
ANGLE_MIN_DEG = -45.0
ANGLE_MAX_DEG = 45.0

# Hand-picked DFT column indices (1-based) covering each 11.25-degree sector
# of the N = 128 geometry.  First row per sector is the 8-beam set, second the
# 4-beam set.  Index lists are verbatim from the design table; note that the
# high indices alias to positive angles (column 127 sits at +1.8 deg).
_BEAMS_8_128 = (
    (37, 39, 40, 41, 42, 43, 44, 46),
    (26, 27, 29, 30, 31, 32, 34, 36),
    (14, 15, 17, 19, 20, 22, 24, 25),
    (1, 3, 5, 7, 8, 10, 12, 13),
    (1, 127, 125, 123, 122, 120, 118, 117),
    (116, 115, 113, 111, 110, 108, 106, 105),
    (104, 103, 101, 100, 99, 98, 96, 94),
    (93, 91, 90, 89, 88, 87, 86, 84),
)
_BEAMS_4_128 = (
    (38, 41, 43, 46),
    (27, 30, 32, 35),
    (15, 18, 21, 24),
    (3, 6, 9, 12),
    (127, 124, 121, 118),
    (115, 112, 109, 106),
    (103, 100, 98, 95),
    (92, 89, 87, 84),
)

# Beams kept for angular-spread estimation: 5 of 8, or all 4.
_AS_BEAM_COUNT = {8: 5, 4: 4}


def steering_vector(phi_deg: float, n_antennas: int) -> np.ndarray:
    """Unit-norm ULA steering vector for a single angle in degrees.

    Element ``m`` (0-based) is ``exp(1j * pi * m * sin(phi)) / sqrt(N)``.
    """
    return steering_matrix(np.asarray([phi_deg], dtype=float), n_antennas)[:, 0]


def steering_matrix(phi_deg: np.ndarray, n_antennas: int) -> np.ndarray:
    """Stack steering vectors for many angles into an N x P matrix."""
    if n_antennas < 1:
        raise ValueError("n_antennas must be >= 1")
    phi = np.deg2rad(np.asarray(phi_deg, dtype=float))
    m = np.arange(n_antennas)[:, None]
    return np.exp(1j * np.pi * m * np.sin(phi)[None, :]) / np.sqrt(n_antennas)


def dft_column(n: int, n_antennas: int) -> np.ndarray:
    """Column ``n`` (1-based) of the unitary N x N DFT matrix.

    Element ``m`` (1-based) is ``exp(-2j pi (m-1)(n-1) / N) / sqrt(N)``.
    """
    if not 1 <= n <= n_antennas:
        raise ValueError(f"DFT column index {n} out of range 1..{n_antennas}")
    m = np.arange(n_antennas)
    return np.exp(-2j * np.pi * m * (n - 1) / n_antennas) / np.sqrt(n_antennas)


def beam_angle(n: int, n_antennas: int) -> float:
    """Angle in degrees whose steering vector equals DFT column ``n``.

    Solves ``exp(1j pi sin(phi)) = exp(-2j pi (n-1)/N)`` by wrapping
    ``-2(n-1)/N`` into [-1, 1) and taking the arcsine, so the result lies in
    [-90, 90).
    """
    if not 1 <= n <= n_antennas:
        raise ValueError(f"DFT column index {n} out of range 1..{n_antennas}")
    s = -2.0 * (n - 1) / n_antennas
    s = (s + 1.0) % 2.0 - 1.0
    return float(np.rad2deg(np.arcsin(s)))


def as_beam_count(beams_per_sector: int) -> int:
    """Beam-window length used for spread estimation (5 of 8, or all 4)."""
    try:
        return _AS_BEAM_COUNT[beams_per_sector]
    except KeyError:
        raise ValueError("beams_per_sector must be 4 or 8") from None


def sector_bounds(sector_id: int) -> tuple[float, float]:
    """Angular range of a 0-based sector index."""
    if not 0 <= sector_id < N_SECTORS:
        raise ValueError(f"sector_id {sector_id} out of range 0..{N_SECTORS - 1}")
    lo = ANGLE_MIN_DEG + sector_id * SECTOR_WIDTH_DEG
    return lo, lo + SECTOR_WIDTH_DEG


def sector_of_angle(theta_deg: float) -> int:
    """0-based sector index of an angle in [-45, 45] (boundary goes upward)."""
    idx = int(np.floor((theta_deg - ANGLE_MIN_DEG) / SECTOR_WIDTH_DEG))
    return min(max(idx, 0), N_SECTORS - 1)


@dataclass(frozen=True)
class SectorPlan:
    """The eight fixed angle sectors with their per-sector DFT beam sets.

    ``beam_indices`` holds 1-based DFT column indices sorted by beam angle
    (ascending), which is the canonical order used everywhere downstream;
    ``as_beam_count`` is the window length kept for spread estimation.
    """

    n_antennas: int
    beams_per_sector: int
    as_beam_count: int
    bounds_deg: tuple[tuple[float, float], ...]
    beam_indices: tuple[tuple[int, ...], ...]
    beam_angles_deg: tuple[tuple[float, ...], ...]

    def sector_of(self, theta_deg: float) -> int:
        return sector_of_angle(theta_deg)

    def sector_bounds(self, sector_id: int) -> tuple[float, float]:
        return self.bounds_deg[sector_id]

    def beam_matrix(self, sector_id: int) -> np.ndarray:
        """N x N_sec matrix of the sector's DFT columns (orthonormal)."""
        return _beam_matrix_cached(self.n_antennas, self.beam_indices[sector_id])

    def to_json(self) -> str:
        doc = {
            "n_antennas": self.n_antennas,
            "beams_per_sector": self.beams_per_sector,
            "as_beam_count": self.as_beam_count,
            "sectors": [
                {
                    "sector_id": i,
                    "bounds_deg": list(self.bounds_deg[i]),
                    "beam_indices": list(self.beam_indices[i]),
                    "beam_angles_deg": list(self.beam_angles_deg[i]),
                }
                for i in range(N_SECTORS)
            ],
        }
        return json.dumps(doc, indent=2)


@lru_cache(maxsize=64)
def _beam_matrix_cached(n_antennas: int, indices: tuple[int, ...]) -> np.ndarray:
    cols = np.stack([dft_column(n, n_antennas) for n in indices], axis=1)
    cols.setflags(write=False)
    return cols


def sector_plan(beams_per_sector: int, n_antennas: int = 128) -> SectorPlan:
    """Build the 8-sector plan for the tabulated N = 128 geometry."""
    if n_antennas != 128:
        raise ValueError("the sector beam table is defined for n_antennas = 128")
    if beams_per_sector == 8:
        rows = _BEAMS_8_128
    elif beams_per_sector == 4:
        rows = _BEAMS_4_128
    else:
        raise ValueError("beams_per_sector must be 4 or 8")
    bounds = tuple(
        (ANGLE_MIN_DEG + i * SECTOR_WIDTH_DEG, ANGLE_MIN_DEG + (i + 1) * SECTOR_WIDTH_DEG)
        for i in range(N_SECTORS)
    )
    indices = []
    angles = []
    for row in rows:
        pairs = sorted((beam_angle(n, n_antennas), n) for n in row)
        indices.append(tuple(n for _, n in pairs))
        angles.append(tuple(a for a, _ in pairs))
    return SectorPlan(
        n_antennas=n_antennas,
        beams_per_sector=beams_per_sector,
        as_beam_count=_AS_BEAM_COUNT[beams_per_sector],
        bounds_deg=bounds,
        beam_indices=tuple(indices),
        beam_angles_deg=tuple(angles),
    )


def project(y: np.ndarray, beams: np.ndarray) -> np.ndarray:
    """Beamspace projection ``b = U^H y`` onto the beam-matrix columns."""
    y = np.asarray(y)
    if y.shape[0] != beams.shape[0]:
        raise ValueError(f"length {y.shape[0]} does not match {beams.shape[0]} antennas")
    return beams.conj().T @ y


def reconstruct(d: np.ndarray, beams: np.ndarray) -> np.ndarray:
    """Low-rank lift ``U d`` back to antenna space; inverse of project on span(U)."""
    d = np.asarray(d)
    if d.shape[0] != beams.shape[1]:
        raise ValueError(f"length {d.shape[0]} does not match {beams.shape[1]} beams")
    return beams @ d
