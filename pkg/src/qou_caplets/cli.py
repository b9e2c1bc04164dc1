"""Command-line entry point for the experiment driver.

Four subcommands map onto the operations in :mod:`qou_caplets.experiments`;
every one takes ``--config <path>`` plus optional ``--out``, ``--threads``
and ``--seed`` overrides.  Exit codes: 0 on success, 1 when a computation
failed (recorded row errors or a FAIL verdict), 2 when the config or the
requested contract is invalid.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ArgumentError, NonPositiveForwardError, QouError
from .experiments import (
    RunReport,
    apply_overrides,
    load_config,
    run_error_surface,
    run_mc_check,
    run_price,
    run_smile,
)

_COMMANDS = {
    "smile": run_smile,
    "error-surface": run_error_surface,
    "price": run_price,
    "mc-check": run_mc_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qou-caplets",
        description=(
            "Caplet experiments for a quadratic Ornstein-Uhlenbeck short-rate "
            "model: exact transform prices, implied-volatility expansions, "
            "and Monte Carlo cross-checks, emitted as CSV artifacts."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="<command>")
    command_help = (
        ("smile", "write per-reset smile tables (exact and approximate vols)"),
        ("error-surface", "write the second-order relative-error surface"),
        ("price", "report one contract's exact price and approximations"),
        ("mc-check", "cross-check one contract against Monte Carlo"),
    )
    for name, help_text in command_help:
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument(
            "--config", required=True, metavar="<path>",
            help="YAML experiment config file",
        )
        cmd.add_argument(
            "--out", default=None, metavar="<dir>",
            help="output directory (overrides the config's output_dir)",
        )
        cmd.add_argument(
            "--threads", type=int, default=None, metavar="<n>",
            help="worker-thread count (overrides the config)",
        )
        cmd.add_argument(
            "--seed", type=int, default=None, metavar="<u64>",
            help="Monte Carlo seed (overrides the config's mc.seed)",
        )
    return parser


def _describe(report: RunReport) -> None:
    if report.text:
        sys.stdout.write(report.text)
    for name in report.files:
        print(f"wrote {report.out_dir / name}")
    if report.command in ("smile", "error-surface"):
        print(f"rows written: {report.n_rows}, row errors: {len(report.errors)}")
    max_rel = report.summary.get("parabolic_max_rel_err")
    if max_rel is not None:
        width = report.summary["parabolic_half_width"]
        cells = report.summary["parabolic_cells"]
        print(
            f"max rel err over |k-x| <= {width}*sqrt(T-t): {max_rel!r} "
            f"({cells} cells)"
        )
    shown = 0
    for err in report.errors:
        if shown == 5:
            remaining = len(report.errors) - shown
            print(f"... {remaining} more row errors in errors.csv", file=sys.stderr)
            break
        print(
            f"row error: T={err.reset!r} k-x={err.log_moneyness!r}: {err.message}",
            file=sys.stderr,
        )
        shown += 1


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        config = apply_overrides(
            config, out=args.out, threads=args.threads, seed=args.seed
        )
        report = _COMMANDS[args.command](config)
    except (ArgumentError, NonPositiveForwardError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except QouError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _describe(report)
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
