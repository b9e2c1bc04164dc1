"""Command-line entry point for the figure renderer.

One invocation renders one figure from published CSV artifacts::

    qou-render --kind smile --in smile_T=0.125.csv ... --out smile.png
    qou-render --kind heatmap --in error_surface.csv --out errors.png \
        [--bands 0.002 0.004 ...]

Exit codes: 0 on success, 2 when arguments or input schemas are invalid,
1 when rendering fails for any other reason.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ArgumentError, RenderError
from .figures import KINDS, FigureSpec, render_heatmap, render_smile


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qou-render",
        description=(
            "Render caplet-experiment CSV artifacts as static figures: "
            "multi-panel implied-volatility smiles, or a discrete banded "
            "heatmap of the relative-error surface."
        ),
    )
    parser.add_argument(
        "--kind", required=True, choices=KINDS,
        help="figure kind",
    )
    parser.add_argument(
        "--in", dest="inputs", required=True, nargs="+", metavar="<csv>",
        help="input CSV file(s): one smile table per panel, or one error surface",
    )
    parser.add_argument(
        "--out", required=True, metavar="<img>",
        help="output image path",
    )
    parser.add_argument(
        "--bands", type=float, nargs="+", default=None, metavar="<edge>",
        help=(
            "heatmap band edges, strictly increasing "
            "(default: steps of 0.002 up to 0.018)"
        ),
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = FigureSpec(
            input_csvs=tuple(args.inputs),
            kind=args.kind,
            out_path=Path(args.out),
            band_edges=tuple(args.bands) if args.bands else (),
        )
        render = render_smile if args.kind == "smile" else render_heatmap
        result = render(spec)
    except ArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {result.out_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
