"""Parametric channel covariance matrices and CN(0, R) channel sampling.

A tap's CCM is the integral of steering-vector outer products over the uniform
power angular spectrum [theta - sigma/2, theta + sigma/2], evaluated with
Gauss-Legendre quadrature.  By default the integral is rescaled so that
trace(R) = rho * N, i.e. ``rho`` is the mean per-antenna channel power and the
received SNR rho/N0 does not depend on the spread.  ``normalized=False`` keeps
the bare integral over radians instead.

Construction goes through a raw factor A with R = A A^H (quadrature nodes or
discrete beams as columns), from which the eigen-truncated sampling factor is
an economy SVD away; the dense matrix itself is assembled lazily since the
samplers never touch it.  Sampling uses the eigen factor because these
matrices are numerically rank-deficient and a triangular factorization would
fail where the eigen route is exact.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .beamspace import steering_matrix, steering_vector

#: Relative eigenvalue cutoff used when factoring a CCM for sampling.
FACTOR_TOL = 1e-12


class Ccm:
    """Hermitian PSD N x N covariance with a cached eigen-truncated factor.

    ``factor`` is N x r with ``factor @ factor.conj().T == matrix`` up to the
    truncation tolerance; ``params`` records the originating
    (theta_deg, sigma_deg, rho) triple when there is one.  Instances are
    immutable by convention and safe to share across workers.
    """

    __slots__ = ("factor", "params", "_raw", "_matrix")

    def __init__(self, factor: np.ndarray, params=None, raw=None, matrix=None):
        self.factor = factor
        self.params = params
        self._raw = raw
        self._matrix = matrix

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            raw = self._raw if self._raw is not None else self.factor
            m = raw @ raw.conj().T
            self._matrix = 0.5 * (m + m.conj().T)
        return self._matrix

    @property
    def n_antennas(self) -> int:
        return self.factor.shape[0]

    @property
    def rank(self) -> int:
        return self.factor.shape[1]

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, tol: float = FACTOR_TOL,
                    params=None) -> "Ccm":
        """Wrap an externally built Hermitian PSD matrix, eigen-factoring it."""
        matrix = np.asarray(matrix)
        return cls(factor=factor(matrix, tol), params=params, matrix=matrix)


def default_quad_nodes(sigma_deg: float, n_antennas: int) -> int:
    """Node count heuristic: the integrand's angular bandwidth scales with N*sigma."""
    sigma_rad = np.deg2rad(sigma_deg)
    return max(16, int(np.ceil(4.0 * n_antennas * sigma_rad)))


@lru_cache(maxsize=128)
def _leggauss(n_nodes: int):
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _from_raw_factor(raw: np.ndarray, params, tol: float = FACTOR_TOL) -> Ccm:
    """Build a Ccm from any A with R = A A^H, eigen-truncating via SVD of A."""
    u, s, _ = np.linalg.svd(raw, full_matrices=False)
    smax = s[0] if s.size else 0.0
    keep = s > np.sqrt(tol) * smax if smax > 0 else np.zeros(s.shape, dtype=bool)
    fac = u[:, keep] * s[keep]
    return Ccm(factor=fac, params=params, raw=raw)


def ccm_from_params(theta_deg: float, sigma_deg: float, rho: float, n_antennas: int,
                    quad_nodes: int | None = None, normalized: bool = True) -> Ccm:
    """CCM of a uniform angular spectrum centred at ``theta_deg``.

    Gauss-Legendre quadrature with ``quad_nodes`` nodes over
    [theta - sigma/2, theta + sigma/2].  With ``normalized`` the result is
    scaled by N / sigma_rad so trace(R) = rho * N; otherwise it is the bare
    integral rho * int u u^H dphi with phi in radians.
    """
    if sigma_deg <= 0:
        raise ValueError("sigma_deg must be positive")
    if rho <= 0:
        raise ValueError("rho must be positive")
    if quad_nodes is None:
        quad_nodes = default_quad_nodes(sigma_deg, n_antennas)
    if quad_nodes < 2:
        raise ValueError("quad_nodes must be >= 2")
    x, w = _leggauss(quad_nodes)
    nodes_deg = theta_deg + 0.5 * sigma_deg * x
    sigma_rad = np.deg2rad(sigma_deg)
    w_rad = 0.5 * sigma_rad * w
    scale = rho * n_antennas / sigma_rad if normalized else rho
    raw = steering_matrix(nodes_deg, n_antennas) * np.sqrt(scale * w_rad)
    return _from_raw_factor(raw, params=(theta_deg, sigma_deg, rho))


def ccm_rank1(theta_deg: float, rho: float, n_antennas: int) -> Ccm:
    """Zero-spread limit: rho * N * u(theta) u^H(theta)."""
    if rho <= 0:
        raise ValueError("rho must be positive")
    u = steering_vector(theta_deg, n_antennas)
    fac = np.sqrt(rho * n_antennas) * u[:, None]
    return Ccm(factor=fac, params=(theta_deg, 0.0, rho), raw=fac)


def ccm_discrete(angles_deg, powers, n_antennas: int) -> Ccm:
    """Finite-beam CCM: sum_i p_i * N * u(theta_i) u^H(theta_i)."""
    angles_deg = np.asarray(angles_deg, dtype=float)
    powers = np.asarray(powers, dtype=float)
    if angles_deg.shape != powers.shape:
        raise ValueError("angles and powers must have equal length")
    if np.any(powers < 0):
        raise ValueError("powers must be >= 0")
    raw = steering_matrix(angles_deg, n_antennas) * np.sqrt(n_antennas * powers)
    return _from_raw_factor(raw, params=None)


def factor(matrix: np.ndarray, tol: float = FACTOR_TOL) -> np.ndarray:
    """Eigen-truncated factor F of a Hermitian PSD matrix, F F^H = matrix.

    Keeps the eigenvalues above ``tol * lambda_max``; raises if any eigenvalue
    falls below ``-tol * lambda_max`` (not PSD within tolerance).
    """
    matrix = np.asarray(matrix)
    vals, vecs = np.linalg.eigh(matrix)
    lam_max = float(vals[-1]) if vals.size else 0.0
    if lam_max <= 0:
        if vals.size and float(np.max(np.abs(vals))) > 0:
            raise ValueError("matrix is not PSD within tolerance")
        return np.zeros((matrix.shape[0], 0), dtype=complex)
    if vals[0] < -tol * lam_max:
        raise ValueError(
            f"matrix is not PSD within tolerance: min eigenvalue {vals[0]:.3e}"
        )
    keep = vals > tol * lam_max
    return vecs[:, keep] * np.sqrt(vals[keep])


def sample_channel(r: Ccm, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw h ~ CN(0, R) through the cached factor, h = F z.

    ``size=None`` returns one (N,) vector; otherwise an (N, size) stack of
    independent draws.
    """
    rank = r.factor.shape[1]
    cols = 1 if size is None else size
    z = (rng.standard_normal((rank, cols)) + 1j * rng.standard_normal((rank, cols)))
    z *= np.sqrt(0.5)
    h = r.factor @ z
    return h[:, 0] if size is None else h
