"""Command-line figure rendering from run logs."""

from __future__ import annotations

import argparse
import sys

from .curves import CurveSpec
from .figures import plot_convergence, plot_summary_bars


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot", description="Figures from commgame CSV/JSON logs")
    sub = parser.add_subparsers(dest="command", required=True)

    p_curves = sub.add_parser("convergence",
                              help="mean accuracy curves with std bands")
    p_curves.add_argument("--csv", required=True,
                          help="checkpoint CSV file, or a runs/ directory")
    p_curves.add_argument("--settings", required=True,
                          help="comma-separated setting ids to overlay")
    p_curves.add_argument("--split", default="test",
                          choices=["train", "test"])
    p_curves.add_argument("--team", default="winning",
                          choices=["winning", "losing"])
    p_curves.add_argument("--smooth", type=int, default=0,
                          help="box smoothing window (checkpoints)")
    p_curves.add_argument("--out", default="curves.png")

    p_bars = sub.add_parser("bars", help="summary accuracy bars")
    p_bars.add_argument("--summary", required=True,
                        help="aggregate summary JSON (commgame summarize --json)")
    p_bars.add_argument("--out", default="bars.png")

    args = parser.parse_args(argv)
    try:
        if args.command == "convergence":
            spec = CurveSpec(
                settings=[s for s in args.settings.split(",") if s],
                split=args.split, team=args.team, smoothing=args.smooth,
                out_path=args.out)
            plot_convergence(args.csv, spec)
        else:
            plot_summary_bars(args.summary, args.out)
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
