"""Command-line interface.

Subcommands:
  run <config>     single scenario; writes CSV trajectory + JSON summary
  sweep <config>   Cartesian product over the [sweep] axes
  verify <suite>   built-in verification suites (fast | full)
  bound <config>   constants ledger and lower bounds only, no stepping

Exit codes: 0 on completed/blow_up outcomes, 1 on configuration errors,
2 on dt_underflow/fault outcomes, 3 when a verify suite fails.
The environment variable CHEMOBLOW_THREADS caps sweep parallelism.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, parse_scenario
from .runner import run_scenario, sweep
from .verify import format_report, run_suite, write_report


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chemoblow",
        description="Radial chemotaxis blow-up simulator and verification "
                    "harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one scenario config")
    p_run.add_argument("config", help="path to a scenario .ini file")
    p_run.add_argument("--dry-run", action="store_true",
                       help="constants ledger and bounds only, no stepping")
    p_run.add_argument("--cells", type=int, default=None,
                       help="override [grid] cells")
    p_run.add_argument("--out", default="out", help="output directory")

    p_sweep = sub.add_parser("sweep", help="run the [sweep] axes product")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--cells", type=int, default=None)
    p_sweep.add_argument("--out", default="out")

    p_verify = sub.add_parser("verify", help="run a verification suite")
    p_verify.add_argument("suite", choices=("fast", "full"))
    p_verify.add_argument("--out", default=None,
                          help="optional path for the JSON report")

    p_bound = sub.add_parser("bound", help="constants and bounds only")
    p_bound.add_argument("config")
    p_bound.add_argument("--cells", type=int, default=None)
    p_bound.add_argument("--out", default="out")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command in ("run", "bound"):
            dry = args.command == "bound" or getattr(args, "dry_run", False)
            scenario = parse_scenario(args.config, cells_override=args.cells)
            summary = run_scenario(scenario, args.out, dry_run=dry)
            print(json.dumps(summary.to_json_dict(), indent=2, sort_keys=True))
            if summary.outcome in ("completed", "blow_up", "dry_run"):
                return 0
            return 2
        if args.command == "sweep":
            agg = sweep(args.config, args.out, cells_override=args.cells)
            print(f"aggregate table: {agg}")
            return 0
        if args.command == "verify":
            report = run_suite(args.suite)
            print(format_report(report))
            if args.out:
                write_report(report, Path(args.out))
            return 0 if report["all_pass"] else 3
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
