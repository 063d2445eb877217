"""Command line: run experiments, summarize, emit curves, audit Borda scores.

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .harness.config import ConfigError, load_config
from .harness.report import (curves, load_records, oracle, parse_filters, report,
                             write_csv)
from .harness.runner import run_experiment, write_records

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def _records_path(args) -> Path:
    if args.config:
        cfg = load_config(args.config)
        base = Path(args.out or cfg.output or ".")
    elif args.out:
        base = Path(args.out)
    else:
        raise ConfigError("give --config or --out to locate records.csv")
    path = base if base.suffix == ".csv" else base / "records.csv"
    if not path.exists():
        raise ConfigError(f"records file {path} not found")
    return path


def cmd_run(args) -> int:
    if args.config is None:
        raise ConfigError("run needs --config")
    if args.filter:
        raise ConfigError("--filter applies to report, curves and oracle, not run")
    cfg = load_config(args.config)
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be nonnegative")
        cfg = dataclasses.replace(cfg, seed=args.seed)
    out = Path(args.out or cfg.output or "results")
    records = run_experiment(cfg, threads=args.threads)
    write_records(records, out / "records.csv")
    ranked, _ = report(load_records(out / "records.csv"))
    write_csv(ranked, out / "summary.csv")
    print(f"{len(records)} records written to {out / 'records.csv'}")
    return EXIT_OK


def _load(args):
    return load_records(_records_path(args), parse_filters(args.filter))


def cmd_report(args) -> int:
    df = _load(args)
    ranked, algos = report(df)
    if args.out and not str(args.out).endswith(".csv"):
        write_csv(ranked, Path(args.out) / "summary.csv")
        write_csv(algos, Path(args.out) / "ranks.csv")
    ranked.to_csv(sys.stdout, index=False, lineterminator="\n")
    print()
    algos.to_csv(sys.stdout, index=False, lineterminator="\n")
    return EXIT_OK


def cmd_curves(args) -> int:
    frame = curves(_load(args))
    if args.out and not str(args.out).endswith(".csv"):
        write_csv(frame, Path(args.out) / "curves.csv")
    else:
        frame.to_csv(sys.stdout, index=False, lineterminator="\n")
    return EXIT_OK


def cmd_oracle(args) -> int:
    frame, ok = oracle(_load(args))
    frame.to_csv(sys.stdout, index=False, lineterminator="\n")
    print("oracle: " + ("match" if ok else "MISMATCH"))
    return EXIT_OK if ok else EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment JSON file")
    common.add_argument("--out", help="output directory (records.csv lives here)")
    common.add_argument("--seed", type=int, help="override the config's base seed")
    common.add_argument("--threads", type=int, default=1, help="worker processes")
    common.add_argument("--filter", action="append", metavar="KEY=VALUE",
                        help="keep only records whose column KEY equals VALUE (repeatable)")
    parser = argparse.ArgumentParser(prog="ordinal-mcts", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, text in (("run", cmd_run, "run an experiment grid"),
                           ("report", cmd_report, "summary and rank tables"),
                           ("curves", cmd_curves, "per-step learning curves"),
                           ("oracle", cmd_oracle, "audit Borda scores against brute force")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (json.JSONDecodeError, OSError, ValueError, RuntimeError, KeyError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
