"""Command-line entry points: run experiments, verify identities, emit tables.

Exit codes: 0 success, 1 config error, 2 data error, 3 check failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .experiment import (
    ConfigError,
    ExperimentError,
    ExperimentResult,
    emit_tables,
    load_config,
    run_experiment,
    run_theory_suite,
    write_outputs,
)
from .tabular import DataError, SchemaError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_CHECK = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cleanval",
        description="Noisy-label cleaning experiments for binary classifier validation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run the full experiment pipeline from a JSON config")
    run_p.add_argument("--config", required=True, help="path to the experiment config (JSON)")

    theory_p = sub.add_parser("theory-check", help="randomized verification of the cleaning-error identities")
    theory_p.add_argument("--trials", type=int, default=1000)
    theory_p.add_argument("--seed", type=int, default=0)
    theory_p.add_argument("--n-max", type=int, default=50, help="largest world size to sample")
    theory_p.add_argument("--output", default="theory_report.json", help="where to write the JSON report")

    emit_p = sub.add_parser("emit", help="re-render tables from a stored result.json")
    emit_p.add_argument("--result", required=True, help="path to result.json from a previous run")
    emit_p.add_argument("--format", required=True, choices=("csv", "markdown"))
    emit_p.add_argument("--output-dir", default=".")
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    result = run_experiment(cfg)
    paths = write_outputs(result, cfg.output_dir)
    for name in sorted(paths):
        print(f"wrote {paths[name]}")
    return EXIT_OK


def _cmd_theory_check(args: argparse.Namespace) -> int:
    if args.trials < 1:
        raise ConfigError(f"--trials must be >= 1, got {args.trials}")
    if args.n_max < 4:
        raise ConfigError(f"--n-max must be >= 4, got {args.n_max}")
    report = run_theory_suite(seed=args.seed, trials=args.trials, n_max=args.n_max)
    with open(args.output, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for name, entry in sorted(report["checks"].items()):
        status = "ok" if entry["failures"] == 0 else "FAIL"
        print(f"{name}: {entry['runs']} runs, {entry['failures']} failures [{status}]")
    print(f"wrote {args.output}")
    if not report["passed"]:
        print("theory checks FAILED; failing worlds serialized for replay", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def _cmd_emit(args: argparse.Namespace) -> int:
    try:
        with open(args.result, "r", encoding="utf-8") as fh:
            result = ExperimentResult.from_dict(json.load(fh))
    except FileNotFoundError as exc:
        raise DataError(f"result file not found: {args.result}") from exc
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise DataError(f"malformed result file: {args.result}: {exc}") from exc
    os.makedirs(args.output_dir, exist_ok=True)
    name = "results.csv" if args.format == "csv" else "tables.md"
    path = os.path.join(args.output_dir, name)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(emit_tables(result, args.format))
    print(f"wrote {path}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "theory-check": _cmd_theory_check, "emit": _cmd_emit}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, SchemaError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ExperimentError as exc:
        cause = exc.__cause__
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(cause, ConfigError):
            return EXIT_CONFIG
        if isinstance(cause, (DataError, SchemaError, OSError)):
            return EXIT_DATA
        if isinstance(cause, ValueError):
            return EXIT_CONFIG
        raise
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
