"""Pilot books, received-block synthesis and matched filtering.

The uplink frame is block-cyclic: a tap at delay tau contributes its user's
pilot circularly right-shifted by tau symbols.  Matched filtering with the
correctly shifted pilot concentrates that tap's channel (gain sqrt(T)) and
leaves the other taps as cross-correlation residue of order 1/T.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: The four unit-magnitude QPSK points (+-1 +-1j)/sqrt(2).
_QPSK = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2.0)


@dataclass(frozen=True)
class PilotBook:
    """K random unit-energy QPSK pilot rows of length T, fixed per experiment."""

    symbols: np.ndarray  # (K, T) complex

    @property
    def n_users(self) -> int:
        return self.symbols.shape[0]

    @property
    def pilot_len(self) -> int:
        return self.symbols.shape[1]

    def pilot(self, user_index: int) -> np.ndarray:
        return self.symbols[user_index]


def generate_pilots(n_users: int, pilot_len: int, rng: np.random.Generator) -> PilotBook:
    """Draw i.i.d. uniform QPSK pilots; deterministic under the rng state."""
    if n_users < 1 or pilot_len < 1:
        raise ValueError("n_users and pilot_len must be >= 1")
    idx = rng.integers(0, 4, size=(n_users, pilot_len))
    return PilotBook(symbols=_QPSK[idx])


def synthesize_rx(taps, channels, pilots: PilotBook, noise_var: float,
                  rng: np.random.Generator, n_antennas: int | None = None) -> np.ndarray:
    """Received block Y = sum over taps of h * shift(x_user, tau) + noise.

    ``taps`` is a sequence of UserTap, ``channels`` the matching sequence of
    (N,) channel vectors for this realization; noise entries are CN(0, N0).
    With no taps the block is pure noise and ``n_antennas`` must be given.
    """
    if len(taps) != len(channels):
        raise ValueError("one channel vector per tap is required")
    if noise_var < 0:
        raise ValueError("noise_var must be >= 0")
    t_len = pilots.pilot_len
    if len(channels) > 0:
        n_antennas = len(channels[0])
        h = np.stack(channels, axis=1)  # (N, L_total)
        x = np.stack(
            [np.roll(pilots.pilot(tap.user_index), tap.delay_taps) for tap in taps],
            axis=0,
        )  # (L_total, T)
        y = h @ x
    elif n_antennas is None:
        raise ValueError("n_antennas is required when there are no taps")
    else:
        y = np.zeros((n_antennas, t_len), dtype=complex)
    if noise_var > 0:
        y = y + rx_noise(n_antennas, t_len, noise_var, rng)
    return y


def rx_noise(n_antennas: int, pilot_len: int, noise_var: float,
             rng: np.random.Generator) -> np.ndarray:
    """Spatially and temporally white CN(0, N0) noise block."""
    scale = np.sqrt(noise_var / 2.0)
    return scale * (
        rng.standard_normal((n_antennas, pilot_len))
        + 1j * rng.standard_normal((n_antennas, pilot_len))
    )


def matched_filter(rx: np.ndarray, pilot: np.ndarray, delay: int = 0) -> np.ndarray:
    """Correlate the block with a (shifted) pilot: (1/sqrt(T)) Y shift(x, tau)^H.

    For the matching tap this returns sqrt(T) h plus pilot cross-terms and
    filtered noise with unchanged per-antenna variance.
    """
    rx = np.asarray(rx)
    pilot = np.asarray(pilot)
    if rx.shape[1] != pilot.shape[0]:
        raise ValueError(f"block width {rx.shape[1]} does not match pilot length {pilot.shape[0]}")
    shifted = np.roll(pilot, delay)
    return rx @ shifted.conj() / np.sqrt(pilot.shape[0])


def channel_estimate(mf_output: np.ndarray, pilot_len: int) -> np.ndarray:
    """Undo the matched-filter gain so a clean single tap returns h itself."""
    return np.asarray(mf_output) / np.sqrt(pilot_len)
