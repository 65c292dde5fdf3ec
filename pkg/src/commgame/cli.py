"""Command-line front end: run plans, summarize results, dump transcripts."""

from __future__ import annotations

import argparse
import os
import sys

from .config import SETTINGS, parse_config
from .harness import format_table, run_plan, summarize


def _add_common(p):
    p.add_argument("--config", help="INI config file")
    p.add_argument("--out-dir", help="runs directory (default: runs)")


def _plan_from_args(args, extra: dict | None = None):
    overrides = dict(extra or {})
    if getattr(args, "out_dir", None):
        overrides["plan.out_dir"] = args.out_dir
    if getattr(args, "setting", None):
        overrides["plan.settings"] = args.setting
    if getattr(args, "seeds", None):
        overrides["plan.seeds"] = args.seeds
    if getattr(args, "epochs", None):
        overrides["train.max_epochs"] = str(args.epochs)
    if getattr(args, "workers", None):
        overrides["plan.workers"] = str(args.workers)
    return parse_config(args.config, overrides)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="commgame",
        description="Two-team referential dialog game experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a (setting x seed) plan")
    _add_common(p_run)
    p_run.add_argument("--setting",
                       help="comma-separated setting ids (%s)" %
                            ",".join(SETTINGS))
    p_run.add_argument("--seeds", help="comma-separated integer seeds")
    p_run.add_argument("--epochs", type=int, help="max training epochs")
    p_run.add_argument("--workers", type=int, help="parallel run workers")

    p_sum = sub.add_parser("summarize", help="aggregate completed runs")
    _add_common(p_sum)
    p_sum.add_argument("--setting", help="comma-separated setting ids")
    p_sum.add_argument("--json", dest="json_out",
                       help="also write the aggregate table to this path")

    p_dump = sub.add_parser("dump-transcripts",
                            help="print a run's greedy test dialogs")
    p_dump.add_argument("--run-dir", required=True,
                        help="runs/<setting>/<seed> directory")

    args = parser.parse_args(argv)

    if args.command == "run":
        plan = _plan_from_args(args)
        failures = run_plan(plan)
        return 1 if failures else 0

    if args.command == "summarize":
        plan = _plan_from_args(args)
        table = summarize(plan.out_dir, plan.settings)
        print(format_table(table))
        if args.json_out:
            with open(args.json_out, "w") as fh:
                fh.write(table.to_json())
        return 0

    if args.command == "dump-transcripts":
        path = os.path.join(args.run_dir, "transcripts.txt")
        if not os.path.exists(path):
            print(f"no transcripts at {path}", file=sys.stderr)
            return 1
        with open(path) as fh:
            sys.stdout.write(fh.read())
        return 0

    return 2


if __name__ == "__main__":
    raise SystemExit(main())
