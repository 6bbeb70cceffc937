"""Command-line wrapper: `qnetplots render <kind> --in <csv> [--in2 <csv>] --out <png>`.

Exit codes: 0 success, 2 usage error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__, charts


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qnetplots", description="Render qnetgec result CSVs to charts."
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("render", help="render one chart from CSV input")
    p.add_argument("kind", choices=charts.CHART_KINDS)
    p.add_argument("--in", dest="csv_in", required=True, help="results CSV")
    p.add_argument("--in2", dest="csv_in2", default=None,
                   help="optional second CSV (strategy curves overlay)")
    p.add_argument("--out", required=True, help="output PNG path")
    p.add_argument("--no-boundary", action="store_true",
                   help="skip the critical-region boundary overlay")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        charts.render(charts.ChartSpec(
            kind=args.kind,
            csv_in=args.csv_in,
            out=args.out,
            csv_in2=args.csv_in2,
            boundary=not args.no_boundary,
        ))
        return 0
    except (charts.ChartError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
