"""plots <run_dir> [--kinds ...]: render the standard levyclaw figures."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import FIGURE_KINDS, available_kinds, default_spec, render
from .readers import SchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plots",
        description="Render figures from levyclaw run/diagnose/pair outputs")
    parser.add_argument("run_dir", help="directory with run artifacts")
    parser.add_argument("--kinds", nargs="+", choices=FIGURE_KINDS,
                        help="figure kinds (default: every kind whose "
                             "inputs exist)")
    parser.add_argument("--format", choices=("png", "svg"), default="png")
    parser.add_argument("--output-dir", default=None,
                        help="where to write images (default: run_dir/figures)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    run_dir = Path(args.run_dir)
    out_dir = Path(args.output_dir) if args.output_dir else run_dir / "figures"
    kinds = args.kinds or available_kinds(run_dir)
    if not kinds:
        print(f"no renderable artifacts found in {run_dir}", file=sys.stderr)
        return 2
    try:
        for kind in kinds:
            path = render(default_spec(kind, run_dir, out_dir, args.format))
            print(f"wrote {path}")
    except (SchemaError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
