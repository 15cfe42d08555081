"""`analyze <kind>` command line: render comparison, heatmap, or
distribution figures from the benchmark harness's output files. Exits
nonzero on any parse or guard failure."""
from __future__ import annotations

import argparse
import sys

from .io import GuardError, ParseError, read_summary
from .plots import plot_comparison, plot_distribution, plot_heatmap


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="analyze")
    sub = parser.add_subparsers(dest="kind", required=True)

    comp = sub.add_parser("comparison",
                          help="method comparison vs search-space size")
    comp.add_argument("--input", required=True, help="summary CSV")
    comp.add_argument("--out", required=True, help="output SVG path")
    comp.add_argument("--hard-only", action="store_true",
                      help="keep only instances where random search never "
                           "found a valid solution")

    heat = sub.add_parser("heatmap",
                          help="(bond dimension x epochs) heatmaps")
    heat.add_argument("--input", required=True, help="summary CSV")
    heat.add_argument("--out", required=True, help="output SVG path")

    dist = sub.add_parser("distribution",
                          help="initial vs trained model distribution")
    dist.add_argument("--initial", required=True,
                      help="initial model checkpoint JSON")
    dist.add_argument("--trained", required=True,
                      help="trained model checkpoint JSON")
    dist.add_argument("--instance", required=True, help="instance JSON")
    dist.add_argument("--out", required=True, help="output SVG path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.kind == "comparison":
            plot_comparison(read_summary(args.input), args.out,
                            hard_only=args.hard_only)
        elif args.kind == "heatmap":
            plot_heatmap(read_summary(args.input), args.out)
        else:
            plot_distribution(args.initial, args.trained, args.instance,
                              args.out)
    except (ParseError, GuardError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
