"""Command line: figplot render --left <csv> --right <csv> --out <png>."""

import argparse
import sys

from .render import FigureSpec, SchemaError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="figplot")
    sub = parser.add_subparsers(dest="command", required=True)
    rend = sub.add_parser("render", help="render the two-panel gap figure")
    rend.add_argument("--left", required=True, help="left-panel CSV (m grid)")
    rend.add_argument("--right", required=True, help="right-panel CSV ((d, m) grid)")
    rend.add_argument("--out", required=True, help="output image path")
    rend.add_argument("--dpi", type=int, default=150)
    args = parser.parse_args(argv)
    try:
        path = render(FigureSpec(left_csv=args.left, right_csv=args.right,
                                 out_path=args.out, dpi=args.dpi))
    except (SchemaError, OSError) as exc:
        print(f"figplot: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
