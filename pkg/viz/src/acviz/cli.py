"""Command line for rendering solver output files.

    acviz timeseries diagnostics.csv --columns uniform_norm,discrete_energy --out norms.png
    acviz snapshot snapshot_n000020.txt --out frame.png

Exit codes: 0 success, 1 bad arguments or unreadable/mismatched input.
"""

import argparse
import sys

from .io import FormatError
from .plots import plot_snapshot, plot_timeseries


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise FormatError(message)


def build_parser():
    parser = _Parser(prog="acviz", description="Plot solver output files")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ts = sub.add_parser("timeseries", help="plot diagnostics columns over time")
    p_ts.add_argument("diagnostics")
    p_ts.add_argument(
        "--columns",
        default="uniform_norm,discrete_energy,continuous_energy",
        help="comma-separated column names",
    )
    p_ts.add_argument("--out", required=True)

    p_snap = sub.add_parser("snapshot", help="render a snapshot grid")
    p_snap.add_argument("snapshot")
    p_snap.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "timeseries":
            columns = [c.strip() for c in args.columns.split(",") if c.strip()]
            plot_timeseries(args.diagnostics, columns, args.out)
        else:
            plot_snapshot(args.snapshot, args.out)
        print(f"wrote {args.out}")
        return 0
    except (FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
