"""Figures from caplet-experiment CSV artifacts.

Two figure kinds cover the published CSV schemas.  A smile figure draws one
panel per reset date (the exact implied-volatility curve against its
order-0/1/2 approximations in a fixed color convention) from per-reset
smile tables.  A heatmap figure bins the relative-error surface into
discrete grey bands, darkest band for the smallest errors.

Rendering is a pure function of the CSV content and the figure spec:
identical inputs give byte-identical image files on a fixed matplotlib
backend (Agg is forced at import), so renders are reproducible and
diffable.  All inputs are read and validated before any output file is
created; a rejected input never leaves a partial image behind.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import BoundaryNorm, ListedColormap

from .errors import ArgumentError, RenderError, SchemaError

SMILE_COLUMNS = ("log_moneyness", "iv_exact", "iv_bar0", "iv_bar1", "iv_bar2")
SURFACE_COLUMNS = ("log_moneyness", "reset_T", "rel_err")

# Color convention for smile panels: (csv column, legend label, color).
SMILE_SERIES = (
    ("iv_exact", "exact", "tab:blue"),
    ("iv_bar0", "order 0", "tab:orange"),
    ("iv_bar1", "order 1", "tab:green"),
    ("iv_bar2", "order 2", "tab:red"),
)

# Default heatmap band edges: fine steps of 0.002 up to 0.018, and coarse
# steps of 0.005 up to 0.03 for noisier surfaces.
DEFAULT_BANDS_FINE = tuple(i / 500.0 for i in range(1, 10))
DEFAULT_BANDS_COARSE = tuple(i / 200.0 for i in range(1, 7))

KINDS = ("smile", "heatmap")

_DARKEST, _LIGHTEST = 0.12, 0.95
_RESET_TOKEN = re.compile(r"T=([0-9eE.+-]+)")


@dataclass(frozen=True)
class FigureSpec:
    """One figure request: input CSVs, kind, band edges, output path."""

    input_csvs: tuple[Path, ...]
    kind: str
    out_path: Path
    band_edges: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ArgumentError(f"kind must be one of {KINDS}, got {self.kind!r}")
        paths = tuple(Path(p) for p in self.input_csvs)
        if not paths:
            raise ArgumentError("need at least one input CSV")
        object.__setattr__(self, "input_csvs", paths)
        object.__setattr__(self, "out_path", Path(self.out_path))
        edges = tuple(float(e) for e in self.band_edges)
        object.__setattr__(self, "band_edges", edges)
        if edges:
            if self.kind != "heatmap":
                raise ArgumentError("band_edges only apply to heatmap figures")
            if edges[0] <= 0.0:
                raise ArgumentError(f"band_edges must be positive, got {edges[0]!r}")
            if any(a >= b for a, b in zip(edges, edges[1:])):
                raise ArgumentError(
                    f"band_edges must be strictly increasing, got {edges}"
                )


@dataclass(frozen=True)
class RenderResult:
    """What a render call produced: the image path and legend metadata."""

    out_path: Path
    panels: tuple[str, ...]
    colors: dict[str, str]


def _read_rows(path: Path, columns: tuple[str, ...]) -> np.ndarray:
    """Read one CSV into a float array with columns in schema order."""
    try:
        with open(path, newline="") as handle:
            reader = csv.reader(handle)
            try:
                header = next(reader)
            except StopIteration:
                raise SchemaError(
                    f"{path}: empty file, expected header {','.join(columns)}"
                ) from None
            rows = [row for row in reader if row]
    except OSError as exc:
        raise ArgumentError(f"cannot read {path}: {exc.strerror or exc}") from exc
    missing = [c for c in columns if c not in header]
    if missing:
        raise SchemaError(
            f"{path}: missing column(s) {', '.join(missing)}; "
            f"expected header {','.join(columns)}"
        )
    extra = [c for c in header if c not in columns]
    if extra:
        raise SchemaError(f"{path}: unexpected column(s) {', '.join(extra)}")
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    order = [header.index(c) for c in columns]
    data = np.empty((len(rows), len(columns)))
    for r, row in enumerate(rows):
        if len(row) != len(header):
            raise SchemaError(
                f"{path}: row {r + 2} has {len(row)} fields, expected {len(header)}"
            )
        for c, pos in enumerate(order):
            try:
                data[r, c] = float(row[pos])
            except ValueError:
                raise SchemaError(
                    f"{path}: non-numeric value {row[pos]!r} in column "
                    f"{columns[c]}, row {r + 2}"
                ) from None
    return data


def _panel_key(path: Path) -> tuple[float, str]:
    """Sort key and title for one smile panel, from the file name.

    Smile tables are published as ``smile_T=<reset>.csv``; when the name
    carries no parseable reset the stem itself becomes the title and such
    panels sort after the dated ones.
    """
    match = _RESET_TOKEN.search(path.stem)
    if match:
        try:
            reset = float(match.group(1))
        except ValueError:
            pass
        else:
            return reset, f"T = {reset:g}"
    return float("inf"), path.stem


def build_smile_figure(spec: FigureSpec):
    """Build the smile figure in memory; returns (figure, panel titles)."""
    if spec.kind != "smile":
        raise ArgumentError(f"spec kind is {spec.kind!r}, expected 'smile'")
    frames = [(path, _read_rows(path, SMILE_COLUMNS)) for path in spec.input_csvs]
    panels = sorted(
        ((_panel_key(path), path, data) for path, data in frames),
        key=lambda item: item[0],
    )
    n = len(panels)
    ncols = 2 if n > 1 else 1
    nrows = (n + ncols - 1) // ncols
    fig, axes = plt.subplots(
        nrows, ncols,
        figsize=(4.6 * ncols, 3.3 * nrows),
        constrained_layout=True, squeeze=False,
    )
    flat = list(axes.flat)
    for ax in flat[n:]:
        ax.set_axis_off()
    titles = []
    for ax, ((_, title), _path, data) in zip(flat, panels):
        moneyness = data[:, SMILE_COLUMNS.index("log_moneyness")]
        for column, label, color in SMILE_SERIES:
            ax.plot(moneyness, data[:, SMILE_COLUMNS.index(column)],
                    color=color, label=label)
        ax.set_title(title)
        ax.set_xlabel("k - x")
        ax.set_ylabel("implied volatility")
        ax.legend()
        titles.append(title)
    return fig, tuple(titles)


def band_index(values, edges) -> np.ndarray:
    """Band of each value: 0 below the first edge, len(edges) at or past the last."""
    return np.searchsorted(np.asarray(edges), np.asarray(values), side="right")


def band_shades(n_bands: int) -> tuple[str, ...]:
    """Grey levels from darkest (band 0, smallest errors) to lightest."""
    if n_bands < 1:
        raise ArgumentError(f"need at least one band, got {n_bands}")
    if n_bands == 1:
        return (str(_DARKEST),)
    levels = np.linspace(_DARKEST, _LIGHTEST, n_bands)
    return tuple(str(round(float(v), 6)) for v in levels)


def band_labels(edges: tuple[float, ...]) -> tuple[str, ...]:
    """Human-readable interval labels, one per band, smallest first."""
    labels = [f"< {edges[0]:g}"]
    labels += [f"{a:g} - {b:g}" for a, b in zip(edges, edges[1:])]
    labels.append(f">= {edges[-1]:g}")
    return tuple(labels)


def _cell_edges(centers: np.ndarray) -> np.ndarray:
    """Mesh edges around sorted cell centers (midpoints, degenerate-safe)."""
    if centers.size == 1:
        span = abs(float(centers[0])) or 1.0
        return np.array([centers[0] - 0.5 * span, centers[0] + 0.5 * span])
    mid = 0.5 * (centers[:-1] + centers[1:])
    first = centers[0] - (mid[0] - centers[0])
    last = centers[-1] + (centers[-1] - mid[-1])
    return np.concatenate(([first], mid, [last]))


def build_heatmap_figure(spec: FigureSpec):
    """Build the banded-error heatmap in memory; returns (figure, edges)."""
    if spec.kind != "heatmap":
        raise ArgumentError(f"spec kind is {spec.kind!r}, expected 'heatmap'")
    edges = spec.band_edges or DEFAULT_BANDS_FINE
    cells: dict[tuple[float, float], float] = {}
    for path in spec.input_csvs:
        for moneyness, reset, err in _read_rows(path, SURFACE_COLUMNS):
            key = (float(reset), float(moneyness))
            if key in cells:
                raise SchemaError(
                    f"{path}: duplicate cell reset_T={key[0]!r}, "
                    f"log_moneyness={key[1]!r}"
                )
            cells[key] = float(err)
    resets = np.array(sorted({t for t, _ in cells}))
    moneynesses = np.array(sorted({k for _, k in cells}))
    grid = np.full((resets.size, moneynesses.size), np.nan)
    rows = {t: i for i, t in enumerate(resets)}
    cols = {k: j for j, k in enumerate(moneynesses)}
    for (reset, moneyness), err in cells.items():
        grid[rows[reset], cols[moneyness]] = err
    n_bands = len(edges) + 1
    bands = np.ma.masked_array(band_index(grid, edges), mask=~np.isfinite(grid))
    cmap = ListedColormap(band_shades(n_bands))
    cmap.set_bad("white")
    norm = BoundaryNorm(np.arange(-0.5, n_bands + 0.5), n_bands)
    fig, ax = plt.subplots(figsize=(7.2, 4.8), constrained_layout=True)
    mesh = ax.pcolormesh(
        _cell_edges(moneynesses), _cell_edges(resets), bands, cmap=cmap, norm=norm
    )
    bar = fig.colorbar(mesh, ax=ax, ticks=[i + 0.5 for i in range(len(edges))])
    bar.ax.set_yticklabels([f"{e:g}" for e in edges])
    bar.set_label("relative error")
    ax.set_xlabel("k - x")
    ax.set_ylabel("reset date T")
    return fig, edges


def _save(fig, out_path: Path) -> None:
    out_path.parent.mkdir(parents=True, exist_ok=True)
    try:
        fig.savefig(out_path, dpi=150)
    except OSError as exc:
        raise RenderError(
            f"cannot write {out_path}: {exc.strerror or exc}"
        ) from exc
    finally:
        plt.close(fig)


def render_smile(spec: FigureSpec) -> RenderResult:
    """Render a multi-panel smile image; one panel per input CSV."""
    fig, titles = build_smile_figure(spec)
    _save(fig, spec.out_path)
    colors = {label: color for _, label, color in SMILE_SERIES}
    return RenderResult(out_path=spec.out_path, panels=titles, colors=colors)


def render_heatmap(spec: FigureSpec) -> RenderResult:
    """Render the banded relative-error heatmap image."""
    fig, edges = build_heatmap_figure(spec)
    _save(fig, spec.out_path)
    colors = dict(zip(band_labels(edges), band_shades(len(edges) + 1)))
    return RenderResult(out_path=spec.out_path, panels=(), colors=colors)
