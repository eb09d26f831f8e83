"""Capon, generalized-eigen and steering beamformers with SINR evaluation.

The served tap's instantaneous channel is taken as perfectly known; everything
the beamformer must suppress is summarized by the interference-plus-noise
covariance R_eta (the other taps' CCMs, unnormalized, plus N0 I).  SINR is
always evaluated against the *true* interference model, regardless of which
covariances built the weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .beamspace import steering_vector
from .ccm import Ccm


@dataclass(frozen=True)
class InterferenceModel:
    """Hermitian positive-definite interference covariance and its sources."""

    r_eta: np.ndarray
    tap_ids: tuple[int, ...]


def interference_ccm(tap_ccms, served_tap_id: int, noise_var: float) -> InterferenceModel:
    """Sum of every tap CCM except the served one, plus N0 I.

    ``tap_ccms`` maps tap id -> Ccm (a sequence is treated as ids 0..L-1);
    CCMs enter unnormalized, i.e. scaled by their own powers.
    """
    if noise_var <= 0:
        raise ValueError("noise_var must be > 0 to keep R_eta invertible")
    if not isinstance(tap_ccms, dict):
        tap_ccms = dict(enumerate(tap_ccms))
    if served_tap_id not in tap_ccms:
        raise KeyError(f"unknown served tap id {served_tap_id}")
    n = next(iter(tap_ccms.values())).n_antennas
    r_eta = noise_var * np.eye(n, dtype=complex)
    others = []
    for tid, c in tap_ccms.items():
        if tid == served_tap_id:
            continue
        r_eta = r_eta + c.matrix
        others.append(tid)
    return InterferenceModel(r_eta=r_eta, tap_ids=tuple(others))


def capon(h: np.ndarray, interference: InterferenceModel) -> np.ndarray:
    """Capon/MVDR weights: the solution of R_eta w = h (no explicit inverse)."""
    h = np.asarray(h)
    if not np.any(h):
        raise ValueError("channel vector is zero")
    w = np.linalg.solve(interference.r_eta, h)
    if not np.all(np.isfinite(w)):
        raise np.linalg.LinAlgError("Capon solve produced non-finite weights")
    return w


def geb(r_served: Ccm, interference: InterferenceModel) -> np.ndarray:
    """Principal generalized eigenvector of (R_served, R_eta), unit norm.

    Solved by symmetric-definite reduction: factor R_eta = L L^H, take the
    top eigenvector of L^-1 R L^-H, and back-substitute through L^H.
    """
    r = r_served.matrix
    chol = np.linalg.cholesky(interference.r_eta)
    # M = L^-1 R L^-H via two triangular solves
    tmp = scipy.linalg.solve_triangular(chol, r, lower=True)
    m = scipy.linalg.solve_triangular(chol, tmp.conj().T, lower=True).conj().T
    m = 0.5 * (m + m.conj().T)
    n = m.shape[0]
    _, vecs = scipy.linalg.eigh(m, subset_by_index=[n - 1, n - 1])
    w = scipy.linalg.solve_triangular(chol.conj().T, vecs[:, 0], lower=False)
    return w / np.linalg.norm(w)


def steer_bf(theta_deg: float, n_antennas: int) -> np.ndarray:
    """Plain steering-vector beamformer w = u(theta)."""
    return steering_vector(theta_deg, n_antennas)


def sinr(w: np.ndarray, h: np.ndarray, interference: InterferenceModel) -> float:
    """|w^H h|^2 / (w^H R_eta w); scale-invariant in w, nonnegative."""
    w = np.asarray(w)
    if not np.any(w):
        raise ValueError("beamformer weights are zero")
    num = np.abs(np.vdot(w, h)) ** 2
    den = np.real(np.vdot(w, interference.r_eta @ w))
    return float(num / den)
