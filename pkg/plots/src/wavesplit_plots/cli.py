"""Plot CLI: render one figure kind from a harness CSV.

Usage: wavesplit-plot --kind {cfl,convergence,topology,decay} --in results.csv
       --out figure.png
"""

from __future__ import annotations

import argparse
import sys

from .figures import KINDS, FigureError, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot", description="Render figures from wavesplit CSV tables")
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--in", dest="csv_path", required=True,
                        help="input CSV (harness schema)")
    parser.add_argument("--out", dest="out_path", required=True,
                        help="output image (png or pdf)")
    parser.add_argument("--no-guides", action="store_true",
                        help="skip reference slope guides")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(kind=args.kind, csv_path=args.csv_path,
                      out_path=args.out_path, with_guides=not args.no_guides)
    try:
        render(spec)
    except (FigureError, OSError) as exc:
        print(f"plot error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
