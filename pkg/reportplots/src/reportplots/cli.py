"""Command-line front end: harness CSV in, PNG figures out."""

from __future__ import annotations

import argparse
import sys

from .errors import EmptyData, IoError, SchemaError
from .figures import KINDS, FigureSpec, render_figures


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="report-plots",
        description="Render comparison figures from harness result CSV",
    )
    parser.add_argument("--in", dest="input_csv", required=True, help="harness CSV")
    parser.add_argument("--out", dest="output_dir", required=True, help="image directory")
    parser.add_argument(
        "--kinds",
        default=",".join(KINDS),
        help="comma-separated subset of: " + ", ".join(KINDS),
    )
    return parser


def _parse_kinds(text: str) -> tuple:
    return tuple(part.strip() for part in text.split(",") if part.strip())


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = FigureSpec(args.input_csv, args.output_dir, _parse_kinds(args.kinds))
        for path in render_figures(spec):
            print(path)
        return 0
    except (SchemaError, EmptyData, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (IoError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
