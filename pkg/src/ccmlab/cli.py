"""Command-line front end for the estimation lab.

Subcommands mirror the experiment lifecycle: dump a scenario, build labeled
datasets, train the per-sector networks, run the AoA / AS / SINR evaluations,
bench the flop counters, and re-export result CSVs.  Exit code 0 on success,
nonzero with a message on stderr otherwise.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import harness
from .estimators import SectorModels, build_aoa_dataset, build_as_dataset
from .scenario import ScenarioConfig, sample_scenario, validate_config


def _load_config(args) -> ScenarioConfig:
    if getattr(args, "config", None):
        cfg = ScenarioConfig.from_json(Path(args.config).read_text())
    else:
        cfg = ScenarioConfig()
    if getattr(args, "seed", None) is not None:
        cfg = cfg.replace(seed=args.seed)
    validate_config(cfg)
    return cfg


def _out_dir(args) -> Path:
    out = Path(getattr(args, "out", None) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_dataset(path: Path, inputs: np.ndarray, targets: np.ndarray) -> None:
    cols = [f"x{i}" for i in range(inputs.shape[1])] + ["target"]
    lines = [",".join(cols)]
    for x, y in zip(inputs, targets):
        lines.append(",".join(repr(float(v)) for v in x) + f",{float(y)!r}")
    path.write_text("\n".join(lines) + "\n")


def cmd_scenario(args) -> int:
    cfg = _load_config(args)
    scen = sample_scenario(cfg, np.random.default_rng(cfg.seed))
    out = _out_dir(args) / "scenario.json"
    out.write_text(scen.to_json())
    print(out)
    return 0


def cmd_build_data(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    rng = np.random.default_rng(cfg.seed)
    sectors = range(8) if args.sector is None else [args.sector]
    for sid in sectors:
        if args.task == "aoa":
            data = build_aoa_dataset(cfg, sid, args.samples, rng)
        else:
            data = build_as_dataset(cfg, sid, args.samples, rng)
        path = out / f"{args.task}_sector{sid}.csv"
        _write_dataset(path, data.inputs, data.targets)
        print(path)
    return 0


def cmd_train(args) -> int:
    cfg = _load_config(args)
    snr_mix = None
    if args.snr_mix:
        snr_mix = tuple(float(v) for v in args.snr_mix.split(","))
    for task in args.task.split(","):
        task = task.strip()
        models = harness.fit_sector_models(
            cfg, task, n_per_sector=args.samples, seed=cfg.seed, snr_mix_db=snr_mix)
        models.save(args.models)
        print(f"{task}: saved to {args.models}")
    return 0


def _spec_from_args(args, cfg) -> harness.ExperimentSpec:
    values = tuple(float(v) for v in args.values.split(","))
    methods = tuple(m.strip() for m in args.methods.split(",")) if getattr(
        args, "methods", None) else harness.AOA_METHODS
    return harness.ExperimentSpec(
        base=cfg, axis=args.axis, axis_values=values, methods=methods,
        n_trials=args.trials, grid_step_deg=args.grid_step, emit_flops=True)


def cmd_eval_aoa(args) -> int:
    cfg = _load_config(args)
    spec = _spec_from_args(args, cfg)
    models = SectorModels.load(args.models, "aoa") if "dnn" in spec.methods else None
    table = harness.run_aoa_sweep(spec, models, threads=args.threads)
    out = _out_dir(args) / "aoa_sweep.csv"
    harness.write_results(table, out, spec)
    print(out)
    return 0


def cmd_eval_as(args) -> int:
    cfg = _load_config(args)
    spec = _spec_from_args(args, cfg)
    models = SectorModels.load(args.models, "as")
    table = harness.run_as_sweep(spec, models, threads=args.threads)
    out = _out_dir(args) / "as_sweep.csv"
    harness.write_results(table, out, spec)
    print(out)
    return 0


def cmd_sinr_cdf(args) -> int:
    cfg = _load_config(args)
    modes = tuple(m.strip() for m in args.modes.split(","))
    spec = harness.ExperimentSpec(
        base=cfg, axis="mean_snr_db", axis_values=(cfg.rho_mean_db,),
        beamformers=tuple(b.strip() for b in args.beamformers.split(",")),
        n_trials=args.trials)
    aoa_models = as_models = None
    if "dnn" in modes:
        aoa_models = SectorModels.load(args.models, "aoa")
        as_models = SectorModels.load(args.models, "as")
    table, samples = harness.run_sinr_cdf(spec, aoa_models, as_models, modes=modes)
    out = _out_dir(args)
    harness.write_results(table, out / "sinr_medians.csv", spec)
    harness.write_samples_csv(samples, out / "sinr_samples.csv")
    harness.write_cdf_csv(samples, out / "sinr_cdf.csv")
    print(out / "sinr_cdf.csv")
    return 0


def cmd_bench_flops(args) -> int:
    cfg = _load_config(args)
    models = SectorModels.load(args.models, "aoa") if args.models else None
    report = harness.bench_flops(cfg, models, grid_step_deg=args.grid_step)
    out = _out_dir(args) / "flops.json"
    out.write_text(json.dumps(report, indent=2))
    for m, v in report["measured"].items():
        print(f"{m}: measured={v} formula={report['formula'][m]}")
    return 0


def cmd_plot_data(args) -> int:
    table = harness.MetricsTable.from_csv(args.infile)
    rows = table.rows
    if args.metric:
        rows = [r for r in rows if r.metric == args.metric]
    if args.method:
        rows = [r for r in rows if r.method == args.method]
    out = Path(args.out or "tidy.csv")
    harness.write_results(harness.MetricsTable(rows), out)
    print(out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ccmlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, models=False, sweep=False):
        p.add_argument("--config", help="ScenarioConfig JSON file")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="output directory")
        p.add_argument("--threads", type=int, default=1, help="trial fan-out workers")
        if models:
            p.add_argument("--models", required=True, help="model bundle directory")
        if sweep:
            p.add_argument("--axis", default="mean_snr_db",
                           choices=["mean_snr_db", "pilot_len"])
            p.add_argument("--values", default="0,15,30", help="comma-separated axis values")
            p.add_argument("--trials", type=int, default=10)
            p.add_argument("--grid-step", type=float, default=0.05)

    p = sub.add_parser("scenario", help="dump one sampled scenario as JSON")
    common(p)
    p.set_defaults(fn=cmd_scenario)

    p = sub.add_parser("build-data", help="emit labeled AoA/AS datasets as CSV")
    common(p)
    p.add_argument("--task", choices=["aoa", "as"], required=True)
    p.add_argument("--sector", type=int, choices=range(8))
    p.add_argument("--samples", type=int, default=10000)
    p.set_defaults(fn=cmd_build_data)

    p = sub.add_parser("train", help="fit per-sector nets and persist the bundle")
    common(p, models=True)
    p.add_argument("--task", default="aoa,as", help="aoa, as, or aoa,as")
    p.add_argument("--samples", type=int, default=20000, help="samples per sector")
    p.add_argument("--snr-mix", help="comma-separated mean-SNR mixture for training drops")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval-aoa", help="MSE/P_out sweep for the AoA estimators")
    common(p, models=True, sweep=True)
    p.add_argument("--methods", default=",".join(harness.AOA_METHODS))
    p.set_defaults(fn=cmd_eval_aoa)

    p = sub.add_parser("eval-as", help="angular-spread MSE sweep")
    common(p, models=True, sweep=True)
    p.set_defaults(fn=cmd_eval_as)

    p = sub.add_parser("sinr-cdf", help="beamforming SINR CDFs")
    common(p)
    p.add_argument("--models", help="model bundle directory (needed for dnn mode)")
    p.add_argument("--modes", default="perfect,dnn")
    p.add_argument("--beamformers", default="capon,geb,steer")
    p.add_argument("--trials", type=int, default=64)
    p.set_defaults(fn=cmd_sinr_cdf)

    p = sub.add_parser("bench-flops", help="instrumented vs symbolic flop counts")
    common(p)
    p.add_argument("--models", help="model bundle directory (adds the dnn row)")
    p.add_argument("--grid-step", type=float, default=0.05)
    p.set_defaults(fn=cmd_bench_flops)

    p = sub.add_parser("plot-data", help="re-export a results CSV (optionally filtered)")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out")
    p.add_argument("--metric")
    p.add_argument("--method")
    p.set_defaults(fn=cmd_plot_data)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, KeyError, OSError, np.linalg.LinAlgError) as exc:
        print(f"ccmlab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
