"""CLI: render --figure N --input <dir> --out <file.png>."""
from __future__ import annotations

import argparse
import sys

from .render import FigureSpec, SchemaMismatch, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="render", description="Render geomphase figures from CSV/JSON outputs"
    )
    parser.add_argument("--figure", type=int, required=True, choices=[1, 2, 3, 4])
    parser.add_argument("--input", required=True, help="geomphase output directory")
    parser.add_argument("--out", required=True, help="image file to write")
    parser.add_argument("--dpi", type=int, default=150)
    args = parser.parse_args(argv)
    try:
        render(FigureSpec(args.figure, args.input, args.out, dpi=args.dpi))
    except SchemaMismatch as exc:
        print(f"render: schema mismatch: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
