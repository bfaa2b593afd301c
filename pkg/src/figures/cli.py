"""Command-line entry point: figures <figure-id> --in <dir> --out <file>."""

import argparse
import sys

from .io import SchemaError
from .render import FIGURE_IDS, render


def build_parser():
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Render oisac experiment CSVs into figures.",
    )
    parser.add_argument("figure_id", choices=FIGURE_IDS, help="figure to render")
    parser.add_argument(
        "--in", dest="indir", required=True, metavar="DIR",
        help="directory holding the experiment CSVs",
    )
    parser.add_argument(
        "--out", dest="outfile", required=True, metavar="FILE",
        help="output image path (.png, .svg, or .pdf)",
    )
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        render(args.figure_id, args.indir, args.outfile)
    except SchemaError as exc:
        print(f"figures: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"figures: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
