"""Command-line entry point.

Subcommands mirror the pipeline stages (synth, impute, kappa, select, train,
matrix, stats) plus `reproduce`, which chains the whole workflow into one
results directory with a manifest. Exit codes: 0 success, 2 configuration or
input error, 3 partial grid, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import grid, impute, records_io, synth
from .agreement import RatingPair, cohen_kappa, interpret_kappa
from .boruta import BorutaConfig, boruta_select
from .config import RunConfig, load_config, parse_config_text
from .errors import BenchError, ConfigError, PartialGrid
from .learners import LearnerSpec, fit, save_model
from .provenance import build_manifest, load_manifest, write_manifest

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARTIAL = 3
EXIT_IO = 4


def _parse_overrides(pairs):
    overrides = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        key, _, value = pair.partition("=")
        overrides[key.strip()] = value.strip()
    return overrides


def _write_json(doc, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_synth(args) -> int:
    cfg = synth.SynthConfig(n_records=args.n, n_children=args.children,
                            env_signal=args.env_signal,
                            behavior_signal=args.behavior_signal,
                            seed=args.seed)
    records = synth.generate(cfg)
    records_io.write_csv(records, args.out)
    print(f"wrote {len(records)} records to {args.out}")
    return EXIT_OK


def cmd_impute(args) -> int:
    records = records_io.read_csv(args.infile)
    imputed, report = impute.impute_records(records, k=args.k)
    records_io.write_csv(imputed, args.out)
    if args.report:
        _write_json(report.as_dict(), args.report)
    filled = sum(f.filled_by_session + f.filled_by_knn
                 for f in report.per_column.values())
    print(f"imputed {filled} cells across {len(report.per_column)} columns")
    return EXIT_OK


def _read_ratings(path):
    with open(path, "r", encoding="utf-8") as fh:
        return tuple(line.strip() for line in fh if line.strip())


def cmd_kappa(args) -> int:
    pair = RatingPair(_read_ratings(args.a), _read_ratings(args.b))
    kappa = cohen_kappa(pair)
    print(f"kappa={kappa:.6f} band={interpret_kappa(max(-1.0, min(1.0, kappa)))}")
    return EXIT_OK


def cmd_select(args) -> int:
    matrix = records_io.read_matrix_csv(args.infile, class_level=args.class_level)
    cfg = BorutaConfig(alpha=args.alpha, max_runs=args.max_runs, seed=args.seed,
                       forest={"n_trees": args.trees, "max_depth": args.depth})
    report = boruta_select(matrix, cfg)
    _write_json(report.as_dict(), args.report)
    print(f"confirmed={len(report.names_with('Confirmed'))} "
          f"tentative={len(report.names_with('Tentative'))} "
          f"rejected={len(report.names_with('Rejected'))} "
          f"runs={report.n_runs}")
    return EXIT_OK


def cmd_train(args) -> int:
    matrix = records_io.read_matrix_csv(args.infile, class_level=args.class_level)
    params = {}
    for key, value in _parse_overrides(args.set).items():
        for cast in (int, float):
            try:
                value = cast(value)
                break
            except ValueError:
                continue
        params[key] = value
    model = fit(LearnerSpec(kind=args.learner, seed=args.seed, params=params),
                matrix)
    save_model(model, args.model)
    print(f"saved {args.learner} model to {args.model}")
    return EXIT_OK


def cmd_matrix(args) -> int:
    config = _load_run_config(args)
    records = records_io.read_csv(args.infile)
    table = grid.run_matrix(records, config.grid_config(),
                            progress=_progress if args.progress else None)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    grid.save_results(table, out)
    if not table.complete:
        print(f"grid partial: {len(table.errors)} failed cells", file=sys.stderr)
        return EXIT_PARTIAL
    print(f"wrote {len(table.cells)} cells to {out}")
    return EXIT_OK


def cmd_stats(args) -> int:
    rows = grid.load_index(args.results)
    analysis = grid.analyze_index_rows(rows)
    _write_json(analysis, args.out)
    text_path = Path(args.out).with_suffix(".txt")
    with open(text_path, "w", encoding="utf-8") as fh:
        fh.write(analysis["stage2"]["table"] + "\n")
    print(f"wrote {args.out} and {text_path}")
    return EXIT_OK


def _progress(done: int, total: int) -> None:
    if done % 12 == 0 or done == total:
        print(f"  cells {done}/{total}", flush=True)


def _load_run_config(args) -> RunConfig:
    overrides = _parse_overrides(getattr(args, "set", None))
    if getattr(args, "manifest", None):
        manifest = load_manifest(args.manifest)
        return parse_config_text(manifest.config_text, overrides)
    if getattr(args, "config", None):
        return load_config(args.config, overrides)
    return parse_config_text("", overrides)


def reproduce(config: RunConfig, out_dir, progress=None) -> int:
    """Full workflow: synth -> impute -> grid -> stats -> manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    records = synth.generate(config.synth_config())
    records_io.write_csv(records, out / "data.csv")

    imputed, report = impute.impute_records(records, k=config.impute_k)
    records_io.write_csv(imputed, out / "data_imputed.csv")
    _write_json(report.as_dict(), out / "impute_report.json")

    table = grid.run_matrix(imputed, config.grid_config(), progress=progress)
    grid.save_results(table, out)

    status = EXIT_OK
    if table.complete:
        analysis = grid.analyze_index_rows(grid.load_index(out / "index.csv"))
        _write_json(analysis, out / "anova.json")
        with open(out / "anova.txt", "w", encoding="utf-8") as fh:
            fh.write(analysis["stage2"]["table"] + "\n")
    else:
        status = EXIT_PARTIAL

    manifest = build_manifest(out, config.seed, config.to_text())
    write_manifest(manifest, out / "manifest.json")
    return status


def cmd_reproduce(args) -> int:
    config = _load_run_config(args)
    status = reproduce(config, args.out,
                       progress=_progress if args.progress else None)
    if status == EXIT_OK:
        print(f"reproduction complete: {args.out}")
    else:
        print("reproduction finished with a partial grid", file=sys.stderr)
    return status


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="behaviorbench",
        description="Behavior-outcome classification benchmark pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset CSV")
    p.add_argument("--n", type=int, default=292)
    p.add_argument("--children", type=int, default=20)
    p.add_argument("--env-signal", type=float, default=0.8)
    p.add_argument("--behavior-signal", type=float, default=0.4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("impute", help="fill missing environment values")
    p.add_argument("--k", type=int, default=14)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.set_defaults(func=cmd_impute)

    p = sub.add_parser("kappa", help="Cohen's kappa between two rating files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.set_defaults(func=cmd_kappa)

    p = sub.add_parser("select", help="Boruta feature selection on a matrix CSV")
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--max-runs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trees", type=int, default=30)
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--class-level", type=int, choices=(2, 3, 7))
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("train", help="fit one learner on a matrix CSV")
    p.add_argument("--learner", required=True, choices=("xgb", "svm", "rf", "nn"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--class-level", type=int, choices=(2, 3, 7))
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="learner hyperparameter override")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("matrix", help="run the 144-cell experiment grid")
    p.add_argument("--in", dest="infile", required=True,
                   help="imputed dataset CSV")
    p.add_argument("--config")
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.add_argument("--out", required=True)
    p.add_argument("--progress", action="store_true")
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("stats", help="two-stage ANOVA over a results index")
    p.add_argument("--results", required=True, help="path to index.csv")
    p.add_argument("--out", required=True, help="output anova.json path")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("reproduce", help="full workflow into one directory")
    p.add_argument("--config")
    p.add_argument("--manifest", help="rerun from a previous run's manifest")
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.add_argument("--out", required=True)
    p.add_argument("--progress", action="store_true")
    p.set_defaults(func=cmd_reproduce)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PartialGrid as exc:
        print(f"partial grid: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except BenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
