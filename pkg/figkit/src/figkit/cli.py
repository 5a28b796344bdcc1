"""figkit command line: one subcommand per figure kind.

Each subcommand takes either ``--spec figure.json`` or direct flags; flags
override spec fields when both are given.
"""

from __future__ import annotations

import argparse
import sys

from .render import FigureSpec, render, spec_from_json
from .schemas import SchemaError


def _build_spec(kind: str, args) -> FigureSpec:
    if args.spec:
        base = spec_from_json(args.spec)
        if base.kind != kind:
            raise SchemaError(
                f"spec kind {base.kind!r} does not match subcommand {kind!r}"
            )
        return FigureSpec(
            kind=kind,
            inputs=tuple(args.csv) if args.csv else base.inputs,
            output=args.out or base.output,
            report=getattr(args, "report", None) or base.report,
            title=args.title or base.title,
            labels=tuple(args.label) if args.label else base.labels,
        )
    if not args.csv:
        raise SchemaError("either --spec or --csv is required")
    if not args.out:
        raise SchemaError("either --spec or --out is required")
    return FigureSpec(
        kind=kind,
        inputs=tuple(args.csv),
        output=args.out,
        report=getattr(args, "report", None),
        title=args.title,
        labels=tuple(args.label),
    )


def _add_common(p, multi_csv=False):
    p.add_argument("--spec", default=None, help="FigureSpec JSON file")
    p.add_argument(
        "--csv",
        action="append",
        default=[],
        help="input CSV" + (" (repeatable)" if multi_csv else ""),
    )
    p.add_argument("--out", default=None, help="output image stem (PNG and SVG)")
    p.add_argument("--title", default=None)
    p.add_argument("--label", action="append", default=[], help="legend label override")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figkit", description="Render lookforest result CSVs into figures."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="accuracy-vs-rho curves with importance panel")
    _add_common(p)

    p = sub.add_parser("equity", help="overlayed equity curves with metric legend")
    _add_common(p, multi_csv=True)
    p.add_argument("--report", default=None, help="backtest report JSON for the legend")

    p = sub.add_parser("heatmap", help="P+ heatmap over a feature pair")
    _add_common(p)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        paths = render(_build_spec(args.command, args))
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for p in paths:
        print(f"wrote {p}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
