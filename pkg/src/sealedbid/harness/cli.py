"""Command-line entry point: ``sealedbid run|bench|demo|verify-trace``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bench import OPERATIONS, run_benchmark
from .replay import verify_trace
from .runner import run_scenario
from .scenario import ScenarioError, builtin_scenario_path, load_scenario


def _run(scenario_path: Path, trace: Path | None) -> int:
    try:
        scenario = load_scenario(scenario_path)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    result = run_scenario(scenario)
    print(result.summary())
    if trace is not None:
        result.write_trace(trace)
        print(f"trace written to {trace}")
    if not result.passed:
        print("error: scenario failed its invariant sweep or expectations", file=sys.stderr)
        return 1
    return 0


def cmd_run(args) -> int:
    return _run(Path(args.scenario), Path(args.trace) if args.trace else None)


def cmd_demo(args) -> int:
    return _run(builtin_scenario_path("honest"), Path(args.trace) if args.trace else None)


def cmd_bench(args) -> int:
    ops = [o for o in args.ops.split(",") if o.strip()] if args.ops else None
    try:
        report = run_benchmark(ops, args.iterations, args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(report.to_table())
    print()
    print(report.to_csv(), end="")
    if args.csv:
        Path(args.csv).write_text(report.to_csv())
    return 0


def cmd_verify_trace(args) -> int:
    try:
        lines = Path(args.trace).read_text().splitlines()
    except OSError as exc:
        print(f"error: cannot read {args.trace}: {exc.strerror}", file=sys.stderr)
        return 2
    report = verify_trace(lines)
    if report.ok:
        print(f"trace ok: {report.transactions} transactions, height {report.final_height}, state {report.state_digest}")
        return 0
    for p in report.problems:
        print(f"violation: {p}", file=sys.stderr)
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sealedbid", description="Anonymous sealed-bid auction simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario file and check every invariant")
    p.add_argument("scenario", help="path to a YAML scenario")
    p.add_argument("--trace", help="write the transaction trace (JSON lines) here")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("demo", help="run the built-in honest three-bidder scenario")
    p.add_argument("--trace", help="write the transaction trace here")
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("bench", help="time procedures and checkers per operation")
    p.add_argument("--iterations", type=int, default=100, help="runs per row, at least 100 (default 100)")
    p.add_argument("--ops", help=f"comma-separated subset of {','.join(OPERATIONS)}")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", help="also write the CSV rows to this file")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("verify-trace", help="replay a trace from genesis and re-check it")
    p.add_argument("trace")
    p.set_defaults(func=cmd_verify_trace)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
