"""plotkit command line: plotkit <kind> <inputs...> -o <path>."""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_KINDS, FigureSpec, render
from .schema import SchemaVersionError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plotkit",
        description="Render figures from chemoblow CSV/JSON outputs")
    parser.add_argument("kind", choices=FIGURE_KINDS)
    parser.add_argument("inputs", nargs="+", help="data files (CSV)")
    parser.add_argument("-o", "--output", required=True, help="image path")
    parser.add_argument("--title", default="", help="figure title override")
    args = parser.parse_args(argv)

    try:
        spec = FigureSpec(kind=args.kind, inputs=args.inputs,
                          output=args.output, title=args.title)
        path = render(spec)
    except SchemaVersionError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
