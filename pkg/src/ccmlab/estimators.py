"""CCM-parameter estimation: DNN pipeline, MUSIC and MaxBeam baselines.

Per tap, the receiver sees T_r beamspace snapshots (the sector's DFT
projections of the matched-filter output).  The DNN route regresses the
arrival angle from each snapshot's normalized beam-power profile and takes the
median, regresses the angular spread from snapshot-to-snapshot statistics of a
beam window around the peak, and reads the power off the strongest beam.
MUSIC and MaxBeam run either on full digital snapshots or on the low-rank
reconstruction from beamspace, over a dense angle grid.

Every estimator can charge an optional :class:`FlopLedger`, which accounts
multiply-accumulates per pipeline stage using the canonical costs of each
method (eigendecompositions are booked at the classical N^3).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import beamspace
from .airlink import channel_estimate, generate_pilots, rx_noise
from .beamspace import SectorPlan, sector_plan, steering_matrix
from .ccm import Ccm, ccm_from_params, sample_channel
from .neural import Mlp
from .scenario import Scenario, ScenarioConfig, sample_scenario

_GRID_STEER_CACHE: dict[tuple[int, bytes], np.ndarray] = {}


def _grid_steering(grid_deg: np.ndarray, n_antennas: int) -> np.ndarray:
    """Steering matrix for a scan grid, cached on (N, grid bytes)."""
    key = (n_antennas, grid_deg.tobytes())
    mat = _GRID_STEER_CACHE.get(key)
    if mat is None:
        if len(_GRID_STEER_CACHE) >= 64:
            _GRID_STEER_CACHE.clear()
        mat = steering_matrix(grid_deg, n_antennas)
        _GRID_STEER_CACHE[key] = mat
    return mat


@dataclass(frozen=True)
class TapObservation:
    """What the estimator sees for one tap across the T_r realizations.

    ``beamspace`` holds the raw matched-filter-domain projections (T_r, N_sec);
    ``full`` optionally the channel estimates (T_r, N) for the digital-BF
    baselines; ``true_params`` the labelling triple (theta, sigma, rho).
    """

    beamspace: np.ndarray
    sector_id: int
    full: np.ndarray | None = None
    true_params: tuple[float, float, float] | None = None

    @property
    def n_realizations(self) -> int:
        return self.beamspace.shape[0]


class LabeledSet(NamedTuple):
    inputs: np.ndarray
    targets: np.ndarray


@dataclass(frozen=True)
class CcmEstimate:
    theta_deg: float
    sigma_deg: float
    rho: float
    ccm: Ccm


class FlopLedger:
    """Monotone multiply-accumulate counters keyed by (method, stage)."""

    def __init__(self):
        self._counts: dict[tuple[str, str], int] = {}

    def add(self, method: str, stage: str, count: int) -> None:
        if count < 0:
            raise ValueError("flop counts must be non-negative")
        key = (method, stage)
        self._counts[key] = self._counts.get(key, 0) + int(count)

    def stages(self, method: str) -> dict[str, int]:
        return {s: c for (m, s), c in self._counts.items() if m == method}

    def total(self, method: str) -> int:
        return sum(c for (m, _), c in self._counts.items() if m == method)

    def methods(self) -> list[str]:
        return sorted({m for (m, _) in self._counts})

    def merge(self, other: "FlopLedger") -> None:
        for (m, s), c in other._counts.items():
            self.add(m, s, c)


def flops(ledger: FlopLedger) -> dict[str, int]:
    """Total multiply-accumulate count per method."""
    return {m: ledger.total(m) for m in ledger.methods()}


# ---------------------------------------------------------------------------
# Observation synthesis (shared by datasets and the Monte Carlo harness)

def observe_scenario(scen: Scenario, pilots, plan: SectorPlan, rng: np.random.Generator,
                     want_full: bool = False,
                     tap_ccms: list[Ccm] | None = None) -> list[TapObservation]:
    """Run the airlink for all T_r realizations and collect per-tap observations.

    Channels are redrawn per realization from each tap's true CCM; pilots and
    tap parameters stay fixed.  ``want_full`` additionally stores the
    channel-estimate snapshots needed by the digital-BF baselines.

    The draw order is fixed (all realizations of tap 0, of tap 1, ..., then
    the noise blocks), so results are a pure function of (scenario, rng state)
    even though the realizations are processed as one batch.
    """
    cfg = scen.config
    taps = scen.taps
    if tap_ccms is None:
        tap_ccms = [
            ccm_from_params(t.aoa_deg, t.spread_deg, t.snr_linear, cfg.n_antennas)
            for t in taps
        ]
    t_r = cfg.n_realizations
    t_len = cfg.pilot_len
    shifted = np.stack(
        [np.roll(pilots.pilot(t.user_index), t.delay_taps) for t in taps], axis=0
    )  # (L, T)
    h_all = np.stack([sample_channel(c, rng, size=t_r) for c in tap_ccms], axis=1)  # (N, L, T_r)
    y_all = np.einsum("nlr,lt->rnt", h_all, shifted, optimize=True)  # (T_r, N, T)
    if cfg.noise_var > 0:
        y_all += rx_noise(t_r * cfg.n_antennas, t_len, cfg.noise_var, rng).reshape(
            t_r, cfg.n_antennas, t_len
        )
    mf_all = y_all @ shifted.conj().T / np.sqrt(t_len)  # (T_r, N, L)
    out: list[TapObservation | None] = [None] * len(taps)
    for sid in sorted({t.sector_id for t in taps}):
        idx = [i for i, t in enumerate(taps) if t.sector_id == sid]
        beams = plan.beam_matrix(sid)
        # (T_r, N, |idx|) -> (|idx|, T_r, P)
        b_sec = np.einsum("np,rni->irp", beams.conj(), mf_all[:, :, idx], optimize=True)
        for j, i in enumerate(idx):
            tap = taps[i]
            out[i] = TapObservation(
                beamspace=b_sec[j],
                sector_id=sid,
                full=channel_estimate(mf_all[:, :, i], t_len) if want_full else None,
                true_params=(tap.aoa_deg, tap.spread_deg, tap.snr_linear),
            )
    return out


# ---------------------------------------------------------------------------
# DNN feature construction

def aoa_dnn_input(b: np.ndarray, normalized: bool = True) -> np.ndarray:
    """Squared beam magnitudes, normalized to unit sum by default.

    Normalization decouples angle regression from the power scale (power has
    its own estimator); an all-zero projection maps to the uniform profile.
    """
    p = np.abs(np.asarray(b)) ** 2
    if not normalized:
        return p
    s = p.sum()
    if s == 0:
        return np.full(p.shape, 1.0 / p.size)
    return p / s


def _window_start(power: np.ndarray, n_sel: int) -> int:
    """Start of the n_sel-wide window centred on the peak, slid to stay in range."""
    c = int(np.argmax(power))
    return min(max(c - n_sel // 2, 0), power.size - n_sel)


def select_as_beams(b: np.ndarray, n_sel: int) -> np.ndarray:
    """Window of ``n_sel`` consecutive beams centred on the strongest one."""
    b = np.asarray(b)
    if n_sel > b.size:
        raise ValueError("n_sel cannot exceed the number of beams")
    start = _window_start(np.abs(b) ** 2, n_sel)
    return b[start:start + n_sel]


def as_dnn_input(obs: TapObservation, n_sel: int) -> np.ndarray:
    """Spread features: per-beam mean and std of windowed, normalized powers.

    One window position is fixed for all realizations (the peak of the
    realization with the globally strongest beam), each realization's selected
    powers are normalized to unit sum, and the per-beam empirical mean and
    standard deviation across the T_r realizations are concatenated.
    """
    if obs.n_realizations < 2:
        raise ValueError("spread features need at least 2 realizations")
    p = np.abs(obs.beamspace) ** 2  # (T_r, N_sec)
    if n_sel > p.shape[1]:
        raise ValueError("n_sel cannot exceed the number of beams")
    r_star = int(np.argmax(p.max(axis=1)))
    start = _window_start(p[r_star], n_sel)
    w = p[:, start:start + n_sel]
    sums = w.sum(axis=1, keepdims=True)
    uniform = np.full((1, n_sel), 1.0 / n_sel)
    wn = np.where(sums > 0, w / np.where(sums > 0, sums, 1.0), uniform)
    return np.concatenate([wn.mean(axis=0), wn.std(axis=0)])


# ---------------------------------------------------------------------------
# Trained model bundles

@dataclass
class SectorModels:
    """One task's per-sector networks plus the metadata needed to apply them."""

    task: str  # "aoa" | "as"
    beams_per_sector: int
    nets: dict[int, Mlp]
    meta: dict
    input_normalized: bool = True

    def net_for(self, sector_id: int) -> Mlp:
        try:
            return self.nets[sector_id]
        except KeyError:
            raise ValueError(f"no trained {self.task} network for sector {sector_id}") from None

    def save(self, directory) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        sectors = {}
        for sid, net in sorted(self.nets.items()):
            fname = f"{self.task}_sector{sid}.json"
            (directory / fname).write_text(net.to_json())
            sectors[str(sid)] = fname
        manifest = {
            "task": self.task,
            "beams_per_sector": self.beams_per_sector,
            "input_normalized": self.input_normalized,
            "sectors": sectors,
            "meta": self.meta,
        }
        (directory / f"{self.task}_manifest.json").write_text(json.dumps(manifest, indent=2))

    @classmethod
    def load(cls, directory, task: str) -> "SectorModels":
        directory = Path(directory)
        manifest_path = directory / f"{task}_manifest.json"
        if not manifest_path.exists():
            raise FileNotFoundError(f"no {task} model manifest in {directory}")
        manifest = json.loads(manifest_path.read_text())
        nets = {
            int(sid): Mlp.from_json((directory / fname).read_text())
            for sid, fname in manifest["sectors"].items()
        }
        return cls(
            task=manifest["task"],
            beams_per_sector=int(manifest["beams_per_sector"]),
            nets=nets,
            meta=manifest.get("meta", {}),
            input_normalized=bool(manifest.get("input_normalized", True)),
        )


# ---------------------------------------------------------------------------
# DNN estimators

def dnn_aoa_per_realization(models: SectorModels, obs: TapObservation) -> np.ndarray:
    """Angle estimate from each realization separately (degrees)."""
    net = models.net_for(obs.sector_id)
    lo, hi = beamspace.sector_bounds(obs.sector_id)
    feats = np.stack([aoa_dnn_input(b, models.input_normalized) for b in obs.beamspace])
    outs = net.forward_batch(feats)[:, 0]
    return lo + (hi - lo) * outs


def dnn_aoa_estimate(models: SectorModels, obs: TapObservation,
                     ledger: FlopLedger | None = None) -> float:
    """Median of the per-realization DNN angle estimates, clamped to the sector."""
    per_r = dnn_aoa_per_realization(models, obs)
    if ledger is not None:
        net = models.net_for(obs.sector_id)
        ledger.add("dnn", "forward", obs.n_realizations * net.mac_count)
    lo, hi = beamspace.sector_bounds(obs.sector_id)
    return float(min(max(np.median(per_r), lo), hi))


def dnn_as_estimate(models: SectorModels, obs: TapObservation,
                    sigma_min: float, sigma_max: float,
                    ledger: FlopLedger | None = None) -> float:
    """Angular-spread estimate in degrees, clamped to [sigma_min, sigma_max]."""
    net = models.net_for(obs.sector_id)
    n_sel = beamspace.as_beam_count(models.beams_per_sector)
    x = as_dnn_input(obs, n_sel)
    out = float(net.forward(x)[0])
    if ledger is not None:
        ledger.add("as_dnn", "preprocess", obs.n_realizations * n_sel)
        ledger.add("as_dnn", "forward", net.mac_count)
    sigma = sigma_min + (sigma_max - sigma_min) * out
    return float(min(max(sigma, sigma_min), sigma_max))


def power_estimate(obs: TapObservation, pilot_len: int, n_antennas: int) -> float:
    """Mean over realizations of max_i |b_i|^2 / (T N).

    The calibration follows from b = sqrt(T) u^H h at the matched filter
    output and E|u^H h|^2 = rho N for an aligned zero-spread tap; the residual
    beam-shape mismatch bias for spread taps is accepted.
    """
    p = np.abs(obs.beamspace) ** 2
    return float(p.max(axis=1).mean() / (pilot_len * n_antennas))


def estimate_ccm(theta_deg: float, sigma_deg: float, rho: float, n_antennas: int,
                 quad_nodes: int | None = None) -> CcmEstimate:
    """Assemble the CCM estimate from the three estimated parameters."""
    for name, v in (("theta", theta_deg), ("sigma", sigma_deg), ("rho", rho)):
        if not np.isfinite(v):
            raise ValueError(f"{name} estimate is not finite")
    matrix = ccm_from_params(theta_deg, sigma_deg, rho, n_antennas, quad_nodes=quad_nodes)
    return CcmEstimate(theta_deg=theta_deg, sigma_deg=sigma_deg, rho=rho, ccm=matrix)


# ---------------------------------------------------------------------------
# Baselines

def music(snapshots: np.ndarray, grid_deg: np.ndarray, n_sources: int = 1,
          ledger: FlopLedger | None = None, method: str = "music_dbf"):
    """Subspace angle estimation over a grid.

    Builds the Hermitian snapshot covariance, splits off the noise subspace V
    (eigenvectors of the N - M smallest eigenvalues) and returns the M grid
    angles minimizing ||V^H u(theta)||^2, evaluated through the complementary
    identity 1 - ||S^H u||^2 with S the signal subspace.  Ties break toward
    the smaller angle.  Returns a scalar for M = 1, else an ascending array.
    """
    s = np.asarray(snapshots)
    grid_deg = np.asarray(grid_deg, dtype=float)
    if grid_deg.size == 0:
        raise ValueError("angle grid must be non-empty")
    if n_sources < 1 or n_sources >= s.shape[1]:
        raise ValueError("need 1 <= n_sources < n_antennas")
    if not np.any(s):
        raise ValueError("all-zero snapshots: covariance spectrum is degenerate")
    t_r, n = s.shape
    cov = s.T @ s.conj() / t_r
    vals, vecs = np.linalg.eigh(cov)
    signal = vecs[:, n - n_sources:]
    u_grid = _grid_steering(grid_deg, n)
    spectrum = 1.0 - np.sum(np.abs(signal.conj().T @ u_grid) ** 2, axis=0)
    if ledger is not None:
        ledger.add(method, "covariance", n * n * t_r)
        ledger.add(method, "eig", n ** 3)
        ledger.add(method, "scan", grid_deg.size * n)
    if n_sources == 1:
        return float(grid_deg[int(np.argmin(spectrum))])
    picked = np.argsort(spectrum, kind="stable")[:n_sources]
    return np.sort(grid_deg[picked])


def music_hbf(obs: TapObservation, beams: np.ndarray, grid_deg: np.ndarray,
              ledger: FlopLedger | None = None) -> float:
    """MUSIC on the low-rank beamspace reconstruction, M = 1, sector grid."""
    d = obs.beamspace  # scale-free: MUSIC only uses eigenvector directions
    htilde = d @ beams.T  # rows are U(Phi) d_n
    if ledger is not None:
        ledger.add("music_hbf", "reconstruct",
                   beams.shape[0] * beams.shape[1] * obs.n_realizations)
    return music(htilde, grid_deg, n_sources=1, ledger=ledger, method="music_hbf")


def maxbeam(snapshots: np.ndarray, grid_deg: np.ndarray,
            ledger: FlopLedger | None = None, method: str = "maxbeam_dbf") -> float:
    """Median over snapshots of the grid angle maximizing |h^H u(theta)|."""
    s = np.asarray(snapshots)
    grid_deg = np.asarray(grid_deg, dtype=float)
    if grid_deg.size == 0:
        raise ValueError("angle grid must be non-empty")
    u_grid = _grid_steering(grid_deg, s.shape[1])
    gains = np.abs(s.conj() @ u_grid)  # (T_r, N_grid)
    if ledger is not None:
        ledger.add(method, "scan", grid_deg.size * s.shape[1] * s.shape[0])
    per_snapshot = grid_deg[np.argmax(gains, axis=1)]
    return float(np.median(per_snapshot))


def maxbeam_hbf(obs: TapObservation, beams: np.ndarray, grid_deg: np.ndarray,
                ledger: FlopLedger | None = None) -> float:
    """MaxBeam on the beamspace reconstruction, sector grid."""
    htilde = obs.beamspace @ beams.T
    if ledger is not None:
        ledger.add("maxbeam_hbf", "reconstruct",
                   beams.shape[0] * beams.shape[1] * obs.n_realizations)
    return maxbeam(htilde, grid_deg, ledger=ledger, method="maxbeam_hbf")


# ---------------------------------------------------------------------------
# Labeled datasets for supervised training

def build_aoa_dataset(cfg: ScenarioConfig, sector_id: int, n_samples: int,
                      rng: np.random.Generator, normalized: bool = True) -> LabeledSet:
    """Angle-regression samples for one sector, from full multi-user drops.

    One sample per tap realization: input is the normalized beam-power
    profile, target the in-sector angle offset scaled to [0, 1].
    """
    plan = sector_plan(cfg.beams_per_sector, cfg.n_antennas)
    pilots = generate_pilots(cfg.n_users, cfg.pilot_len, rng)
    lo, hi = beamspace.sector_bounds(sector_id)
    xs: list[np.ndarray] = []
    ys: list[float] = []
    while len(xs) < n_samples:
        scen = sample_scenario(cfg, rng)
        for tap, obs in zip(scen.taps, observe_scenario(scen, pilots, plan, rng)):
            if tap.sector_id != sector_id:
                continue
            target = (tap.aoa_deg - lo) / (hi - lo)
            for b in obs.beamspace:
                xs.append(aoa_dnn_input(b, normalized))
                ys.append(target)
    return LabeledSet(np.array(xs[:n_samples]), np.array(ys[:n_samples]))


def build_as_dataset(cfg: ScenarioConfig, sector_id: int, n_samples: int,
                     rng: np.random.Generator) -> LabeledSet:
    """Spread-regression samples for one sector; one sample per tap.

    Targets are (sigma - sigma_min) / (sigma_max - sigma_min) in [0, 1].
    """
    plan = sector_plan(cfg.beams_per_sector, cfg.n_antennas)
    pilots = generate_pilots(cfg.n_users, cfg.pilot_len, rng)
    n_sel = plan.as_beam_count
    span = cfg.sigma_max - cfg.sigma_min
    xs: list[np.ndarray] = []
    ys: list[float] = []
    while len(xs) < n_samples:
        scen = sample_scenario(cfg, rng)
        for tap, obs in zip(scen.taps, observe_scenario(scen, pilots, plan, rng)):
            if tap.sector_id != sector_id:
                continue
            xs.append(as_dnn_input(obs, n_sel))
            ys.append((tap.spread_deg - cfg.sigma_min) / span if span > 0 else 0.0)
    return LabeledSet(np.array(xs[:n_samples]), np.array(ys[:n_samples]))
