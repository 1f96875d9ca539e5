"""Command line front end: ``figures <kind> --in <csv> --out <png>``.

Failures print one line to standard error, ``error: <Type>: <message>``,
and exit with status 1.
"""

import argparse
import sys

from .render import render
from .spec import KINDS, FigureSpec


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Render publication-style figures from fit pipeline CSVs.",
    )
    parser.add_argument("kind", choices=sorted(KINDS), help="figure kind")
    parser.add_argument(
        "--in", dest="inputs", action="append", required=True, metavar="CSV",
        help="input CSV; scenario-means accepts a second one (the raw "
             "dataset) for observed-trajectory overlays",
    )
    parser.add_argument("--out", required=True, metavar="IMAGE",
                        help="output image path (png, pdf, svg, ...)")
    parser.add_argument("--ids", default="", metavar="A,B,...",
                        help="comma-separated curve ids to draw (default: first panels)")
    parser.add_argument("--params", default="", metavar="A,B,...",
                        help="comma-separated scalar series for trace/acf panels")
    parser.add_argument("--threshold", type=float, default=0.9,
                        help="reference line level for the rope kind (default 0.9)")
    parser.add_argument("--dpi", type=int, default=120, help="raster resolution")
    parser.add_argument("--max-panels", type=int, default=12,
                        help="panel cap when no explicit ids are given")
    return parser


def _split(raw: str) -> tuple:
    return tuple(s.strip() for s in raw.split(",") if s.strip())


def dispatch(argv) -> int:
    args = _build_parser().parse_args(argv)
    try:
        spec = FigureSpec(
            kind=args.kind,
            inputs=tuple(args.inputs),
            out=args.out,
            ids=_split(args.ids),
            params=_split(args.params),
            threshold=args.threshold,
            dpi=args.dpi,
            max_panels=args.max_panels,
        )
        path = render(spec)
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
