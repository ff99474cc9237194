"""Experiment runner CLI: ``flg run`` executes strategy x seed experiment
cells from a JSON config, ``flg synth`` writes synthetic cubes, and
``flg report`` aggregates curve files into plot-ready mean/std tables.
"""

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .al_loop import ALConfig, CSV_COLUMNS, METRIC_FIELDS, run_experiment, timing_rows, to_rows
from .data import SynthSpec, load_cube, normalize, save_cube, synth_generate

CONFIG_KEYS = {
    "dataset", "synth", "classifier", "classifier_params",
    "n_initial", "batch_size", "candidate_cap", "threshold",
    "omega", "lambda", "psi", "k1", "k2", "proj_dim",
    "seeds", "strategies", "stratified", "high_only",
    "scatter_labels", "holdout", "patch_window", "out_dir",
}

SYNTH_KEYS = {"classes", "bands", "height", "width", "noise_sigma", "separation", "seed", "border"}


class ConfigError(Exception):
    pass


def _load_config(path, overrides):
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    unknown = set(raw) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if ("dataset" in raw) == ("synth" in raw):
        raise ConfigError("config needs exactly one of 'dataset' or 'synth'")
    if "synth" in raw:
        bad = set(raw["synth"]) - SYNTH_KEYS
        if bad:
            raise ConfigError(f"unknown synth keys: {sorted(bad)}")
    if overrides.seed_list:
        try:
            raw["seeds"] = [int(s) for s in overrides.seed_list.split(",")]
        except ValueError as exc:
            raise ConfigError(f"bad --seed-list: {exc}") from exc
    if overrides.strategy:
        raw["strategies"] = [overrides.strategy]
    if overrides.out:
        raw["out_dir"] = overrides.out
    if overrides.patch is not None:
        raw["patch_window"] = overrides.patch
    raw.setdefault("seeds", [0])
    raw.setdefault("strategies", ["flg"])
    raw.setdefault("out_dir", "results")
    if not raw["seeds"] or not all(isinstance(s, int) for s in raw["seeds"]):
        raise ConfigError("seeds must be a nonempty list of integers")
    for key in ("n_initial", "batch_size", "threshold", "candidate_cap",
                "k1", "k2", "proj_dim", "patch_window"):
        if raw.get(key) is not None and not isinstance(raw[key], int):
            raise ConfigError(f"{key} must be an integer")
    for s in raw["strategies"]:
        if s not in ("flg", "random", "fuzziness-only"):
            raise ConfigError(f"unknown strategy {s!r}")
    return raw


def _resolve_cube(raw):
    if "dataset" in raw:
        name = raw["dataset"]
        header = Path(name if name.endswith(".json") else name + ".json")
        if not header.exists():
            raise ConfigError(f"dataset not found: {header}")
        cube = load_cube(name)
    else:
        spec_args = dict(raw["synth"])
        seed = spec_args.pop("seed", 0)
        cube = synth_generate(SynthSpec(**spec_args), seed)
    return normalize(cube)


def _cell_config(raw, strategy, seed):
    kwargs = dict(
        classifier=raw.get("classifier", "mlr"),
        classifier_params=raw.get("classifier_params", {}),
        n_initial=raw.get("n_initial", 50),
        batch_size=raw.get("batch_size", 100),
        candidate_cap=raw.get("candidate_cap"),
        threshold=raw.get("threshold", 2500),
        omega=raw.get("omega", 0.5),
        lam=raw.get("lambda", 0.5),
        psi=raw.get("psi", 0.5),
        k1=raw.get("k1", 5),
        k2=raw.get("k2", 5),
        proj_dim=raw.get("proj_dim"),
        stratified=raw.get("stratified", False),
        high_only=raw.get("high_only", False),
        scatter_labels=raw.get("scatter_labels", "actual"),
        holdout=raw.get("holdout", 0.0),
        patch_window=raw.get("patch_window"),
        seed=seed,
        strategy=strategy,
    )
    try:
        return ALConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _run_cell(cube, config):
    return run_experiment(cube, config)


def _fmt(value):
    if isinstance(value, float):
        return "nan" if np.isnan(value) else f"{value:.10f}"
    return str(value)


def _write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])


def cmd_run(args):
    raw = _load_config(args.config, args)
    cube = _resolve_cube(raw)
    cells = [(s, seed) for s in raw["strategies"] for seed in raw["seeds"]]
    configs = [_cell_config(raw, s, seed) for s, seed in cells]

    out_dir = Path(raw["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)

    workers = int(os.environ.get("FLG_THREADS", "1"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_cell, [cube] * len(configs), configs))
    else:
        results = [_run_cell(cube, cfg) for cfg in configs]

    curve_rows, time_rows = [], []
    for (strategy, seed), records in zip(cells, results):
        curve_rows.extend(to_rows(records, seed, strategy))
        time_rows.extend(timing_rows(records, seed, strategy))
    _write_csv(out_dir / "curves.csv", CSV_COLUMNS, curve_rows)
    _write_csv(
        out_dir / "timings.csv",
        ("seed", "iteration", "train_size", "duration_ms", "strategy"),
        [dict(r, duration_ms=round(r["duration_ms"], 3)) for r in time_rows],
    )

    summary_rows = _summarize(curve_rows)
    _write_csv(out_dir / "summary.csv", _summary_columns(), summary_rows)

    meta = {
        "config": raw,
        "versions": {
            "flg": __version__,
            "numpy": np.__version__,
            "python": sys.version.split()[0],
        },
    }
    (out_dir / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return 0


def _summary_columns():
    cols = ["strategy", "final_train_size"]
    for name in METRIC_FIELDS:
        cols += [f"{name}_mean", f"{name}_std"]
    return tuple(cols)


def _summarize(curve_rows):
    """Final-iteration mean and std per strategy."""
    out = []
    strategies = sorted({r["strategy"] for r in curve_rows})
    for strategy in strategies:
        rows = [r for r in curve_rows if r["strategy"] == strategy]
        last = max(r["iteration"] for r in rows)
        finals = [r for r in rows if r["iteration"] == last]
        summary = {"strategy": strategy, "final_train_size": finals[0]["train_size"]}
        for name in METRIC_FIELDS:
            vals = np.array([f[name] for f in finals], dtype=np.float64)
            summary[f"{name}_mean"] = float(vals.mean())
            summary[f"{name}_std"] = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
        out.append(summary)
    return out


def cmd_synth(args):
    try:
        height, width = (int(v) for v in args.size.lower().split("x"))
    except ValueError:
        print(f"bad --size {args.size!r}, expected MxN", file=sys.stderr)
        return 1
    spec = SynthSpec(
        classes=args.classes, bands=args.bands, height=height, width=width,
        noise_sigma=args.noise_sigma, separation=args.separation,
    )
    cube = synth_generate(spec, args.seed)
    save_cube(cube, args.out)
    return 0


def cmd_report(args):
    path = Path(args.infile)
    if not path.exists():
        print(f"curves file not found: {path}", file=sys.stderr)
        return 1
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or args.metric not in reader.fieldnames:
            print(f"malformed curves file or missing metric {args.metric!r}", file=sys.stderr)
            return 1
        try:
            rows = [
                (r["strategy"], int(r["train_size"]), float(r[args.metric]))
                for r in reader
            ]
        except (KeyError, ValueError) as exc:
            print(f"malformed curves file: {exc}", file=sys.stderr)
            return 1

    grouped = {}
    for strategy, size, value in rows:
        grouped.setdefault((strategy, size), []).append(value)

    out_rows = []
    for (strategy, size) in sorted(grouped):
        vals = np.array(grouped[(strategy, size)])
        out_rows.append({
            "strategy": strategy, "train_size": size,
            "mean": float(vals.mean()),
            "std": float(vals.std(ddof=1)) if vals.size > 1 else 0.0,
        })
    out_path = Path(args.out) if args.out else path.with_name(f"report_{args.metric}.csv")
    _write_csv(out_path, ("strategy", "train_size", "mean", "std"), out_rows)

    print(f"{args.metric} by training-set size")
    print(f"{'strategy':<16}{'train_size':>12}{'mean':>12}{'std':>12}")
    for row in out_rows:
        print(f"{row['strategy']:<16}{row['train_size']:>12}{row['mean']:>12.4f}{row['std']:>12.4f}")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(prog="flg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the experiment cells of a config file")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--seed-list", default=None, help="comma-separated seed override")
    p_run.add_argument("--strategy", default=None, choices=("flg", "random", "fuzziness-only"))
    p_run.add_argument("--out", default=None, help="output directory override")
    p_run.add_argument("--patch", type=int, default=None,
                       help="odd window size; selection then works on band x window patches")

    p_synth = sub.add_parser("synth", help="write a synthetic cube")
    p_synth.add_argument("--classes", type=int, default=3)
    p_synth.add_argument("--bands", type=int, default=20)
    p_synth.add_argument("--size", default="64x64", help="HEIGHTxWIDTH")
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--noise-sigma", type=float, default=1.0)
    p_synth.add_argument("--separation", type=float, default=2.0)
    p_synth.add_argument("--out", required=True)

    p_report = sub.add_parser("report", help="aggregate a curves.csv into mean/std tables")
    p_report.add_argument("--in", dest="infile", required=True)
    p_report.add_argument("--metric", default="oa",
                          choices=("oa", "aa", "kappa", "precision", "recall", "f1"))
    p_report.add_argument("--out", default=None)

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "synth":
            return cmd_synth(args)
        return cmd_report(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
