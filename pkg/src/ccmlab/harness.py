"""Monte Carlo experiment driver: sweeps, histograms, SINR CDFs, flop benches.

Every experiment is reproducible from its :class:`ExperimentSpec`: per-trial
generators are derived from (seed, purpose, axis index, trial index) so axis
points are statistically independent, workers can fan trials out, and shards
merge deterministically in (axis, trial) order.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from . import beamspace
from .airlink import generate_pilots
from .beamform import InterferenceModel, capon, geb, sinr, steer_bf
from .ccm import ccm_from_params, sample_channel
from .estimators import (
    FlopLedger,
    LabeledSet,
    SectorModels,
    aoa_dnn_input,
    as_dnn_input,
    dnn_aoa_estimate,
    dnn_as_estimate,
    estimate_ccm,
    maxbeam,
    maxbeam_hbf,
    music,
    music_hbf,
    observe_scenario,
    power_estimate,
)
from .neural import Mlp, TrainConfig, architectures, train
from .scenario import ScenarioConfig, sample_scenario, validate_config

AOA_METHODS = ("dnn", "music_dbf", "music_hbf", "maxbeam_dbf", "maxbeam_hbf")
BEAMFORMERS = ("capon", "geb", "steer")

# rng stream purposes; combined with (seed, axis index, trial index)
_SALT_PILOTS = 101
_SALT_TRIAL = 202
_SALT_SINR = 303
_SALT_DATA = 404
_SALT_TRAIN = 505


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng((int(seed),) + tuple(int(k) for k in key))


# ---------------------------------------------------------------------------
# Metrics

def mse(errors) -> float:
    """Mean squared error of a non-empty error list (degrees^2 for angles)."""
    errors = np.asarray(errors, dtype=float)
    if errors.size == 0:
        raise ValueError("mse of an empty error list")
    return float(np.mean(errors**2))


def p_out(errors, half_bw: float = 1.5) -> float:
    """Outage probability: fraction of |error| strictly above half a beamwidth."""
    errors = np.asarray(errors, dtype=float)
    if errors.size == 0:
        raise ValueError("p_out of an empty error list")
    if half_bw <= 0:
        raise ValueError("half_bw must be positive")
    return float(np.mean(np.abs(errors) > half_bw))


def empirical_cdf(values):
    """Right-continuous step CDF as (value, fraction <= value) pairs, sorted."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("empirical_cdf of an empty sample")
    vs = np.sort(values)
    fracs = np.searchsorted(vs, vs, side="right") / vs.size
    return list(zip(vs.tolist(), fracs.tolist()))


# ---------------------------------------------------------------------------
# Result rows

CSV_HEADER = ("method", "axis", "axis_value", "metric", "value", "n", "seed")


@dataclass(frozen=True)
class MetricsRow:
    method: str
    axis: str
    axis_value: float
    metric: str
    value: float
    n: int
    seed: int


class MetricsTable:
    """Append-only long-form result records."""

    def __init__(self, rows=None):
        self.rows: list[MetricsRow] = list(rows) if rows else []

    def append(self, **kwargs) -> None:
        row = MetricsRow(**kwargs)
        if not np.isfinite(row.value):
            raise ValueError(f"non-finite metric value in {row}")
        self.rows.append(row)

    def extend(self, other: "MetricsTable") -> None:
        self.rows.extend(other.rows)

    def __len__(self) -> int:
        return len(self.rows)

    def to_csv_text(self) -> str:
        lines = [",".join(CSV_HEADER)]
        for r in self.rows:
            lines.append(
                f"{r.method},{r.axis},{r.axis_value!r},{r.metric},{r.value!r},{r.n},{r.seed}"
            )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, path) -> "MetricsTable":
        table = cls()
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != list(CSV_HEADER):
                raise ValueError(f"unexpected CSV header {reader.fieldnames} in {path}")
            for rec in reader:
                table.append(
                    method=rec["method"],
                    axis=rec["axis"],
                    axis_value=float(rec["axis_value"]),
                    metric=rec["metric"],
                    value=float(rec["value"]),
                    n=int(rec["n"]),
                    seed=int(rec["seed"]),
                )
        return table


def write_results(table: MetricsTable, path, spec: "ExperimentSpec | None" = None) -> None:
    """Write the CSV and an adjacent .manifest.json capturing the spec."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(table.to_csv_text())
    manifest = {
        "version": __version__,
        "spec": spec.to_dict() if spec is not None else None,
    }
    path.with_suffix(path.suffix + ".manifest.json").write_text(
        json.dumps(manifest, indent=2)
    )


def write_samples_csv(samples: dict, path) -> None:
    """Raw per-method samples (SINRs, errors) as method,value rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["method,value"]
    for method in sorted(samples):
        for v in np.asarray(samples[method]).ravel():
            lines.append(f"{method},{float(v)!r}")
    path.write_text("\n".join(lines) + "\n")


def write_cdf_csv(samples: dict, path) -> None:
    """Empirical CDF points per method as method,value,fraction rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["method,value,fraction"]
    for method in sorted(samples):
        for v, f in empirical_cdf(samples[method]):
            lines.append(f"{method},{v!r},{f!r}")
    path.write_text("\n".join(lines) + "\n")


def write_hist_csv(hists: dict, path) -> None:
    """Binned histograms per method as method,bin_left,bin_right,mass rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["method,bin_left,bin_right,mass"]
    for method in sorted(hists):
        edges, mass = hists[method]
        for i in range(len(mass)):
            lines.append(
                f"{method},{float(edges[i])!r},{float(edges[i + 1])!r},{float(mass[i])!r}"
            )
    path.write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Experiment specification

@dataclass(frozen=True)
class ExperimentSpec:
    """One sweep: what to vary, which methods to run, how many trials."""

    base: ScenarioConfig
    axis: str = "mean_snr_db"
    axis_values: tuple = (0.0, 15.0, 30.0)
    methods: tuple = AOA_METHODS
    beamformers: tuple = BEAMFORMERS
    n_trials: int = 10
    grid_step_deg: float = 0.05
    emit_flops: bool = False

    def validate(self) -> None:
        validate_config(self.base)
        if self.axis not in ("mean_snr_db", "pilot_len"):
            raise ValueError("axis must be 'mean_snr_db' or 'pilot_len'")
        if len(self.axis_values) == 0:
            raise ValueError("axis_values must be non-empty")
        if len(self.methods) == 0:
            raise ValueError("methods must be non-empty")
        unknown = set(self.methods) - set(AOA_METHODS) - {"as_dnn"}
        if unknown:
            raise ValueError(f"unknown methods: {sorted(unknown)}")
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if self.grid_step_deg <= 0:
            raise ValueError("grid_step_deg must be positive")

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["axis_values"] = list(self.axis_values)
        doc["methods"] = list(self.methods)
        doc["beamformers"] = list(self.beamformers)
        return doc


def _apply_axis(cfg: ScenarioConfig, axis: str, value) -> ScenarioConfig:
    if axis == "mean_snr_db":
        return replace(cfg, rho_mean_db=float(value))
    if axis == "pilot_len":
        return replace(cfg, pilot_len=int(value))
    raise ValueError(f"unknown sweep axis {axis!r}")


def angle_grid(lo: float, hi: float, step: float) -> np.ndarray:
    """Inclusive uniform grid; 0.05 deg over one sector gives 226 points."""
    n = int(round((hi - lo) / step)) + 1
    return np.linspace(lo, hi, n)


# ---------------------------------------------------------------------------
# AoA sweep

def _estimate_tap_aoa(method, obs, plan, full_grid, sector_grids, models, ledger):
    if method == "dnn":
        return dnn_aoa_estimate(models, obs, ledger)
    if method == "music_dbf":
        return music(obs.full, full_grid, 1, ledger, method="music_dbf")
    if method == "music_hbf":
        return music_hbf(obs, plan.beam_matrix(obs.sector_id),
                         sector_grids[obs.sector_id], ledger)
    if method == "maxbeam_dbf":
        return maxbeam(obs.full, full_grid, ledger, method="maxbeam_dbf")
    if method == "maxbeam_hbf":
        return maxbeam_hbf(obs, plan.beam_matrix(obs.sector_id),
                           sector_grids[obs.sector_id], ledger)
    raise ValueError(f"unknown AoA method {method!r}")


def _aoa_trial(spec: ExperimentSpec, models, axis_index: int, trial: int):
    """One scenario at one axis point: per-method signed errors and flops."""
    cfg = _apply_axis(spec.base, spec.axis, spec.axis_values[axis_index])
    plan = beamspace.sector_plan(cfg.beams_per_sector, cfg.n_antennas)
    pilots = generate_pilots(cfg.n_users, cfg.pilot_len,
                             _rng(spec.base.seed, _SALT_PILOTS, axis_index))
    rng = _rng(spec.base.seed, _SALT_TRIAL, axis_index, trial)
    scen = sample_scenario(cfg, rng)
    want_full = any(m.endswith("_dbf") for m in spec.methods)
    obs_list = observe_scenario(scen, pilots, plan, rng, want_full=want_full)
    full_grid = angle_grid(cfg.theta_min, cfg.theta_max, spec.grid_step_deg)
    sector_grids = [
        angle_grid(*beamspace.sector_bounds(s), spec.grid_step_deg)
        for s in range(beamspace.N_SECTORS)
    ]
    ledger = FlopLedger()
    errors = {m: [] for m in spec.methods}
    for tap, obs in zip(scen.taps, obs_list):
        for m in spec.methods:
            theta_hat = _estimate_tap_aoa(m, obs, plan, full_grid, sector_grids,
                                          models, ledger)
            errors[m].append(theta_hat - tap.aoa_deg)
    return errors, ledger


_WORKER_CTX: dict = {}


def _init_sweep_worker(kind, spec, models):
    _WORKER_CTX["kind"] = kind
    _WORKER_CTX["spec"] = spec
    _WORKER_CTX["models"] = models


def _run_sweep_job(task):
    axis_index, trial = task
    if _WORKER_CTX["kind"] == "aoa":
        return _aoa_trial(_WORKER_CTX["spec"], _WORKER_CTX["models"], axis_index, trial)
    return _as_trial(_WORKER_CTX["spec"], _WORKER_CTX["models"], axis_index, trial)


def _fan_out(kind, spec, models, threads):
    """Run all (axis, trial) jobs, keeping deterministic (axis, trial) order."""
    tasks = [(ai, t) for ai in range(len(spec.axis_values)) for t in range(spec.n_trials)]
    if threads <= 1:
        _init_sweep_worker(kind, spec, models)
        return [_run_sweep_job(t) for t in tasks]
    with ProcessPoolExecutor(
        max_workers=threads, initializer=_init_sweep_worker,
        initargs=(kind, spec, models),
    ) as pool:
        return list(pool.map(_run_sweep_job, tasks, chunksize=max(1, len(tasks) // (4 * threads))))


def run_aoa_sweep(spec: ExperimentSpec, models: SectorModels | None = None,
                  threads: int = 1, collect_errors: bool = False):
    """MSE / outage / flops per method over the swept axis.

    Returns a MetricsTable, plus the raw per-(method, axis value) error lists
    when ``collect_errors`` is set (they audit the emitted MSE rows).
    """
    spec.validate()
    if "dnn" in spec.methods and models is None:
        raise ValueError("the dnn method needs a trained AoA model bundle")
    results = _fan_out("aoa", spec, models, threads)
    table = MetricsTable()
    all_errors: dict[tuple[str, float], list[float]] = {}
    for ai, axis_value in enumerate(spec.axis_values):
        errors = {m: [] for m in spec.methods}
        ledger = FlopLedger()
        for t in range(spec.n_trials):
            trial_errors, trial_ledger = results[ai * spec.n_trials + t]
            for m in spec.methods:
                errors[m].extend(trial_errors[m])
            ledger.merge(trial_ledger)
        for m in spec.methods:
            errs = errors[m]
            all_errors[(m, axis_value)] = errs
            table.append(method=m, axis=spec.axis, axis_value=float(axis_value),
                         metric="mse", value=mse(errs), n=len(errs), seed=spec.base.seed)
            table.append(method=m, axis=spec.axis, axis_value=float(axis_value),
                         metric="p_out", value=p_out(errs), n=len(errs), seed=spec.base.seed)
            if spec.emit_flops:
                table.append(method=m, axis=spec.axis, axis_value=float(axis_value),
                             metric="flops", value=ledger.total(m) / max(len(errs), 1),
                             n=len(errs), seed=spec.base.seed)
    if collect_errors:
        return table, all_errors
    return table


def run_error_hist(spec: ExperimentSpec, models: SectorModels | None = None,
                   bins: int = 50, hist_range: tuple = (-5.0, 5.0), threads: int = 1):
    """Signed-error histograms per method, pooled over the spec's axis values."""
    _, errors = run_aoa_sweep(spec, models, threads=threads, collect_errors=True)
    pooled: dict[str, list[float]] = {m: [] for m in spec.methods}
    for (m, _), errs in errors.items():
        pooled[m].extend(errs)
    hists = {}
    for m, errs in pooled.items():
        if not errs:
            raise ValueError(f"no errors collected for {m}")
        counts, edges = np.histogram(errs, bins=bins, range=hist_range)
        hists[m] = (edges, counts / len(errs))
    return hists


# ---------------------------------------------------------------------------
# AS sweep

def _as_trial(spec: ExperimentSpec, models, axis_index: int, trial: int):
    cfg = _apply_axis(spec.base, spec.axis, spec.axis_values[axis_index])
    plan = beamspace.sector_plan(cfg.beams_per_sector, cfg.n_antennas)
    pilots = generate_pilots(cfg.n_users, cfg.pilot_len,
                             _rng(spec.base.seed, _SALT_PILOTS, axis_index))
    rng = _rng(spec.base.seed, _SALT_TRIAL, axis_index, trial)
    scen = sample_scenario(cfg, rng)
    obs_list = observe_scenario(scen, pilots, plan, rng)
    ledger = FlopLedger()
    errors = []
    for tap, obs in zip(scen.taps, obs_list):
        sigma_hat = dnn_as_estimate(models, obs, cfg.sigma_min, cfg.sigma_max, ledger)
        errors.append(sigma_hat - tap.spread_deg)
    return {"as_dnn": errors}, ledger


def run_as_sweep(spec: ExperimentSpec, models: SectorModels, threads: int = 1) -> MetricsTable:
    """Angular-spread MSE over the swept axis (one row per axis point)."""
    spec.validate()
    results = _fan_out("as", spec, models, threads)
    table = MetricsTable()
    for ai, axis_value in enumerate(spec.axis_values):
        errors: list[float] = []
        ledger = FlopLedger()
        for t in range(spec.n_trials):
            trial_errors, trial_ledger = results[ai * spec.n_trials + t]
            errors.extend(trial_errors["as_dnn"])
            ledger.merge(trial_ledger)
        table.append(method="as_dnn", axis=spec.axis, axis_value=float(axis_value),
                     metric="mse", value=mse(errors), n=len(errors), seed=spec.base.seed)
        if spec.emit_flops:
            table.append(method="as_dnn", axis=spec.axis, axis_value=float(axis_value),
                         metric="flops", value=ledger.total("as_dnn") / max(len(errors), 1),
                         n=len(errors), seed=spec.base.seed)
    return table


# ---------------------------------------------------------------------------
# Beamforming SINR CDFs

def run_sinr_cdf(spec: ExperimentSpec, aoa_models: SectorModels | None = None,
                 as_models: SectorModels | None = None,
                 modes: tuple = ("perfect", "dnn")):
    """Per-user SINR samples for (estimator mode x beamformer) pairs.

    Each trial drops one scenario; per user, the strongest tap (true power in
    perfect mode, estimated power in dnn mode) is served, weights are built
    from that mode's covariances, and the SINR is evaluated against the *true*
    interference model.  Returns (MetricsTable of medians, samples dict).
    """
    spec.validate()
    if "dnn" in modes and (aoa_models is None or as_models is None):
        raise ValueError("dnn mode needs trained AoA and AS model bundles")
    cfg = spec.base
    plan = pilots = None
    if "dnn" in modes:
        plan = beamspace.sector_plan(cfg.beams_per_sector, cfg.n_antennas)
        pilots = generate_pilots(cfg.n_users, cfg.pilot_len, _rng(cfg.seed, _SALT_PILOTS, 0))
    samples: dict[str, list[float]] = {
        f"{mode}_{bf}": [] for mode in modes for bf in spec.beamformers
    }
    for trial in range(spec.n_trials):
        rng = _rng(cfg.seed, _SALT_SINR, trial)
        scen = sample_scenario(cfg, rng)
        taps = scen.taps
        true_ccms = [
            ccm_from_params(t.aoa_deg, t.spread_deg, t.snr_linear, cfg.n_antennas)
            for t in taps
        ]
        # instantaneous channels for data transmission, perfectly known
        h_taps = [sample_channel(c, rng) for c in true_ccms]
        sum_true = cfg.noise_var * np.eye(cfg.n_antennas, dtype=complex)
        for c in true_ccms:
            sum_true = sum_true + c.matrix

        est_params = None
        sum_hat = None
        est_ccms = None
        if "dnn" in modes:
            obs_list = observe_scenario(scen, pilots, plan, rng, tap_ccms=true_ccms)
            est_params = []
            est_ccms = []
            sum_hat = cfg.noise_var * np.eye(cfg.n_antennas, dtype=complex)
            for obs in obs_list:
                theta_hat = dnn_aoa_estimate(aoa_models, obs)
                sigma_hat = dnn_as_estimate(as_models, obs, cfg.sigma_min, cfg.sigma_max)
                rho_hat = power_estimate(obs, cfg.pilot_len, cfg.n_antennas)
                est = estimate_ccm(theta_hat, sigma_hat, max(rho_hat, 1e-12), cfg.n_antennas)
                est_params.append(est)
                est_ccms.append(est.ccm)
                sum_hat = sum_hat + est.ccm.matrix

        for k in range(cfg.n_users):
            tap_ids = [i for i, t in enumerate(taps) if t.user_index == k]
            if not tap_ids:
                continue
            for mode in modes:
                if mode == "perfect":
                    served = max(tap_ids, key=lambda i: taps[i].snr_linear)
                else:
                    served = max(tap_ids, key=lambda i: est_params[i].rho)
                h = h_taps[served]
                true_interf = InterferenceModel(
                    r_eta=sum_true - true_ccms[served].matrix, tap_ids=())
                if mode == "perfect":
                    build_interf = true_interf
                    r_served = true_ccms[served]
                    theta_point = taps[served].aoa_deg
                else:
                    build_interf = InterferenceModel(
                        r_eta=sum_hat - est_ccms[served].matrix, tap_ids=())
                    r_served = est_ccms[served]
                    theta_point = est_params[served].theta_deg
                for bf in spec.beamformers:
                    if bf == "capon":
                        w = capon(h, build_interf)
                    elif bf == "geb":
                        w = geb(r_served, build_interf)
                    elif bf == "steer":
                        w = steer_bf(theta_point, cfg.n_antennas)
                    else:
                        raise ValueError(f"unknown beamformer {bf!r}")
                    samples[f"{mode}_{bf}"].append(sinr(w, h, true_interf))
    table = MetricsTable()
    for name, vals in sorted(samples.items()):
        table.append(method=name, axis="none", axis_value=0.0,
                     metric="median_sinr_db",
                     value=float(10 * np.log10(np.median(vals))),
                     n=len(vals), seed=cfg.seed)
    return table, {k: np.asarray(v) for k, v in samples.items()}


# ---------------------------------------------------------------------------
# Training orchestration

def build_training_sets(cfg: ScenarioConfig, task: str, n_per_sector: int,
                        rng: np.random.Generator, snr_mix_db=None,
                        normalized: bool = True) -> dict[int, LabeledSet]:
    """Labeled sets for all 8 sectors from one stream of multi-user drops.

    ``snr_mix_db`` draws each drop's mean SNR from the given list so the
    training distribution covers the deployment sweep range.
    """
    plan = beamspace.sector_plan(cfg.beams_per_sector, cfg.n_antennas)
    pilots = generate_pilots(cfg.n_users, cfg.pilot_len, rng)
    n_sel = plan.as_beam_count
    span = cfg.sigma_max - cfg.sigma_min
    xs: dict[int, list] = {s: [] for s in range(beamspace.N_SECTORS)}
    ys: dict[int, list] = {s: [] for s in range(beamspace.N_SECTORS)}
    while min(len(v) for v in xs.values()) < n_per_sector:
        c = cfg
        if snr_mix_db is not None:
            c = replace(cfg, rho_mean_db=float(rng.choice(snr_mix_db)))
        scen = sample_scenario(c, rng)
        for tap, obs in zip(scen.taps, observe_scenario(scen, pilots, plan, rng)):
            sid = tap.sector_id
            if len(xs[sid]) >= n_per_sector:
                continue
            if task == "aoa":
                lo, hi = beamspace.sector_bounds(sid)
                target = (tap.aoa_deg - lo) / (hi - lo)
                for b in obs.beamspace:
                    xs[sid].append(aoa_dnn_input(b, normalized))
                    ys[sid].append(target)
            elif task == "as":
                xs[sid].append(as_dnn_input(obs, n_sel))
                ys[sid].append((tap.spread_deg - cfg.sigma_min) / span if span > 0 else 0.0)
            else:
                raise ValueError(f"unknown task {task!r}")
    return {
        s: LabeledSet(np.array(xs[s][:n_per_sector]), np.array(ys[s][:n_per_sector]))
        for s in xs
    }


DEFAULT_TRAIN = {
    "aoa": TrainConfig(learning_rate=0.05, momentum=0.9, batch_size=128,
                       max_epochs=120, patience=12, validation_fraction=0.1),
    "as": TrainConfig(learning_rate=0.05, momentum=0.9, batch_size=128,
                      max_epochs=200, patience=20, validation_fraction=0.1),
}

DEFAULT_SNR_MIX = {
    "aoa": (0.0, 10.0, 20.0, 30.0),
    "as": (-20.0, -10.0, -5.0, 0.0, 10.0, 20.0, 30.0),
}


def fit_sector_models(cfg: ScenarioConfig, task: str, n_per_sector: int, seed: int,
                      train_cfg: TrainConfig | None = None, snr_mix_db=None,
                      datasets: dict[int, LabeledSet] | None = None,
                      fine_tune: bool = True) -> SectorModels:
    """Generate (or take) per-sector labeled sets and fit the 8 networks.

    ``fine_tune`` runs a second momentum-descent pass at a fifth of the
    learning rate, which reliably shaves a few percent off the validation MSE.
    """
    if task not in ("aoa", "as"):
        raise ValueError(f"unknown task {task!r}")
    if train_cfg is None:
        train_cfg = DEFAULT_TRAIN[task]
    if snr_mix_db is None:
        snr_mix_db = DEFAULT_SNR_MIX[task]
    if datasets is None:
        datasets = build_training_sets(cfg, task, n_per_sector,
                                       _rng(seed, _SALT_DATA), snr_mix_db)
    shapes = architectures(cfg.beams_per_sector, task)
    nets = {}
    history = {}
    for sid in range(beamspace.N_SECTORS):
        net = Mlp(shapes[sid], _rng(seed, _SALT_TRAIN, sid))
        sector_cfg = replace(train_cfg, seed=int(_rng(seed, _SALT_TRAIN, sid, 1).integers(2**31)))
        result = train(net, datasets[sid].inputs, datasets[sid].targets, sector_cfg)
        if fine_tune:
            tune_cfg = replace(sector_cfg, learning_rate=sector_cfg.learning_rate / 5,
                               max_epochs=max(sector_cfg.max_epochs // 2, 1),
                               seed=sector_cfg.seed + 1)
            tuned = train(net, datasets[sid].inputs, datasets[sid].targets, tune_cfg)
            if tuned.best_val < result.best_val:
                result = tuned
        nets[sid] = net
        history[str(sid)] = {"best_val_mse": result.best_val, "best_epoch": result.best_epoch,
                             "epochs_run": len(result.train_loss)}
    meta = {
        "seed": seed,
        "n_per_sector": n_per_sector,
        "snr_mix_db": list(snr_mix_db) if snr_mix_db is not None else None,
        "train": asdict(train_cfg),
        "config": asdict(cfg),
        "history": history,
    }
    return SectorModels(task=task, beams_per_sector=cfg.beams_per_sector,
                        nets=nets, meta=meta)


# ---------------------------------------------------------------------------
# Complexity bench

def flop_formulas(cfg: ScenarioConfig, n_grid_sector: int, n_grid_full: int,
                  aoa_mac: int) -> dict[str, int]:
    """Symbolic per-estimate flop counts for each AoA method."""
    n = cfg.n_antennas
    t_r = cfg.n_realizations
    n_sec = cfg.beams_per_sector
    return {
        "dnn": t_r * aoa_mac,
        "music_hbf": n * n_sec * t_r + n * n * t_r + n**3 + n_grid_sector * n,
        "music_dbf": n * n * t_r + n**3 + n_grid_full * n,
        "maxbeam_hbf": n * n_sec * t_r + n_grid_sector * n * t_r,
        "maxbeam_dbf": n_grid_full * n * t_r,
    }


def bench_flops(cfg: ScenarioConfig, models: SectorModels | None = None,
                grid_step_deg: float = 0.05) -> dict:
    """Run each method once on a synthetic tap and report instrumented counts.

    Returns {"measured": per-method ledger totals, "formula": symbolic counts}
    so callers can check the instrumentation reproduces the symbolic rows.
    """
    validate_config(cfg)
    plan = beamspace.sector_plan(cfg.beams_per_sector, cfg.n_antennas)
    pilots = generate_pilots(cfg.n_users, cfg.pilot_len, _rng(cfg.seed, _SALT_PILOTS, 0))
    rng = _rng(cfg.seed, _SALT_TRIAL, 0, 0)
    scen = sample_scenario(cfg, rng)
    obs = observe_scenario(scen, pilots, plan, rng, want_full=True)[0]
    full_grid = angle_grid(cfg.theta_min, cfg.theta_max, grid_step_deg)
    sector_grids = [angle_grid(*beamspace.sector_bounds(s), grid_step_deg)
                    for s in range(beamspace.N_SECTORS)]
    ledger = FlopLedger()
    methods = list(AOA_METHODS) if models is not None else [
        m for m in AOA_METHODS if m != "dnn"]
    for m in methods:
        _estimate_tap_aoa(m, obs, plan, full_grid, sector_grids, models, ledger)
    aoa_mac = models.net_for(obs.sector_id).mac_count if models is not None else \
        sum(a * b for a, b in zip([cfg.beams_per_sector, 16, 16], [16, 16, 1]))
    formulas = flop_formulas(cfg, sector_grids[0].size, full_grid.size, aoa_mac)
    measured = {m: ledger.total(m) for m in methods}
    return {"measured": measured, "formula": {m: formulas[m] for m in methods}}
