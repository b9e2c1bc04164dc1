"""Figure construction: spec validation, schemas, colors, bands, determinism."""

import csv

import pytest

from qou_render import (
    DEFAULT_BANDS_COARSE,
    DEFAULT_BANDS_FINE,
    SMILE_SERIES,
    ArgumentError,
    FigureSpec,
    SchemaError,
    band_index,
    band_labels,
    band_shades,
    build_heatmap_figure,
    build_smile_figure,
    render_heatmap,
    render_smile,
)

import matplotlib.pyplot as plt

from csvkit import SMILE_HEADER, write_smile, write_surface

EXPECTED_COLORS = {
    "exact": "tab:blue",
    "order 0": "tab:orange",
    "order 1": "tab:green",
    "order 2": "tab:red",
}


class TestFigureSpec:
    """Constructor validation for figure requests."""

    def test_kind_validated(self, tmp_path):
        with pytest.raises(ArgumentError, match="kind"):
            FigureSpec(("a.csv",), "scatter", tmp_path / "o.png")

    def test_needs_inputs(self, tmp_path):
        with pytest.raises(ArgumentError, match="at least one"):
            FigureSpec((), "smile", tmp_path / "o.png")

    def test_band_edges_strictly_increasing(self, tmp_path):
        with pytest.raises(ArgumentError, match="strictly increasing"):
            FigureSpec(("a.csv",), "heatmap", tmp_path / "o.png", (0.004, 0.002))
        with pytest.raises(ArgumentError, match="strictly increasing"):
            FigureSpec(("a.csv",), "heatmap", tmp_path / "o.png", (0.002, 0.002))

    def test_band_edges_positive(self, tmp_path):
        with pytest.raises(ArgumentError, match="positive"):
            FigureSpec(("a.csv",), "heatmap", tmp_path / "o.png", (0.0, 0.002))

    def test_bands_rejected_for_smile(self, tmp_path):
        with pytest.raises(ArgumentError, match="only apply to heatmap"):
            FigureSpec(("a.csv",), "smile", tmp_path / "o.png", (0.002,))

    def test_paths_coerced(self, tmp_path):
        spec = FigureSpec(("a.csv",), "smile", str(tmp_path / "o.png"))
        assert all(hasattr(p, "suffix") for p in spec.input_csvs), "paths expected"
        assert spec.out_path.suffix == ".png", f"got {spec.out_path!r}"


class TestSmileFigure:
    """Panel layout, the color convention, and schema failures."""

    def test_color_convention(self):
        colors = {label: color for _, label, color in SMILE_SERIES}
        assert colors == EXPECTED_COLORS, f"convention drifted: {colors}"
        columns = tuple(column for column, _, _ in SMILE_SERIES)
        assert columns == ("iv_exact", "iv_bar0", "iv_bar1", "iv_bar2")
        print("PASS: exact=blue, order0=orange, order1=green, order2=red")

    def test_lines_follow_convention(self, tmp_path):
        spec = FigureSpec(
            (write_smile(tmp_path / "smile_T=0.125.csv"),), "smile",
            tmp_path / "o.png",
        )
        fig, titles = build_smile_figure(spec)
        try:
            drawn = {
                line.get_label(): line.get_color()
                for line in fig.axes[0].get_lines()
            }
            assert drawn == EXPECTED_COLORS, f"artist colors {drawn}"
            assert titles == ("T = 0.125",), f"titles {titles}"
        finally:
            plt.close(fig)
        print("PASS: drawn lines carry the labeled color convention")

    def test_panels_sorted_by_reset(self, tmp_path):
        resets = ("0.125", "0.015625", "0.0625", "0.03125")
        paths = [write_smile(tmp_path / f"smile_T={r}.csv") for r in resets]
        spec = FigureSpec(tuple(paths), "smile", tmp_path / "o.png")
        fig, titles = build_smile_figure(spec)
        try:
            expected = ("T = 0.015625", "T = 0.03125", "T = 0.0625", "T = 0.125")
            assert titles == expected, f"panel order {titles}"
            panels = [ax for ax in fig.axes if ax.get_lines()]
            assert len(panels) == 4, f"{len(panels)} populated panels"
        finally:
            plt.close(fig)

    def test_axis_labels(self, tmp_path):
        spec = FigureSpec(
            (write_smile(tmp_path / "s.csv"),), "smile", tmp_path / "o.png"
        )
        fig, _ = build_smile_figure(spec)
        try:
            ax = fig.axes[0]
            assert ax.get_xlabel() == "k - x", f"xlabel {ax.get_xlabel()!r}"
            assert ax.get_ylabel() == "implied volatility"
        finally:
            plt.close(fig)

    def test_missing_column_named(self, tmp_path):
        columns = tuple(c for c in SMILE_HEADER if c != "iv_bar1")
        path = write_smile(tmp_path / "s.csv", columns=columns)
        spec = FigureSpec((path,), "smile", tmp_path / "o.png")
        with pytest.raises(SchemaError, match="iv_bar1"):
            build_smile_figure(spec)

    def test_unexpected_column_named(self, tmp_path):
        path = write_smile(tmp_path / "s.csv", columns=SMILE_HEADER + ("note",))
        spec = FigureSpec((path,), "smile", tmp_path / "o.png")
        with pytest.raises(SchemaError, match="note"):
            build_smile_figure(spec)

    def test_empty_csv_rejected_without_output(self, tmp_path):
        path = write_smile(tmp_path / "s.csv", rows=False)
        out = tmp_path / "o.png"
        with pytest.raises(SchemaError, match="no data rows"):
            render_smile(FigureSpec((path,), "smile", out))
        assert not out.exists(), "output file written despite rejected input"
        print("PASS: empty CSV rejected and no image file written")

    def test_non_numeric_cell_located(self, tmp_path):
        path = tmp_path / "s.csv"
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(SMILE_HEADER)
            writer.writerow(["0.0", "0.6", "0.6", "0.6", "0.6"])
            writer.writerow(["0.1", "0.6", "oops", "0.6", "0.6"])
        spec = FigureSpec((path,), "smile", tmp_path / "o.png")
        with pytest.raises(SchemaError, match="'oops'.*iv_bar0.*row 3"):
            build_smile_figure(spec)

    def test_ragged_row_located(self, tmp_path):
        path = tmp_path / "s.csv"
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(SMILE_HEADER)
            writer.writerow(["0.0", "0.6", "0.6", "0.6"])
        spec = FigureSpec((path,), "smile", tmp_path / "o.png")
        with pytest.raises(SchemaError, match="row 2 has 4 fields"):
            build_smile_figure(spec)

    def test_render_writes_image(self, tmp_path):
        paths = tuple(
            write_smile(tmp_path / f"smile_T={r}.csv") for r in ("0.0625", "0.125")
        )
        out = tmp_path / "fig" / "smile.png"
        result = render_smile(FigureSpec(paths, "smile", out))
        assert out.exists() and out.stat().st_size > 0, "image missing or empty"
        assert result.out_path == out
        assert result.panels == ("T = 0.0625", "T = 0.125")
        assert result.colors == EXPECTED_COLORS, f"legend metadata {result.colors}"
        print(f"PASS: wrote {out.stat().st_size} byte smile image")

    def test_byte_identical_rerenders(self, tmp_path):
        path = write_smile(tmp_path / "smile_T=0.125.csv")
        first, second = tmp_path / "a.png", tmp_path / "b.png"
        render_smile(FigureSpec((path,), "smile", first))
        render_smile(FigureSpec((path,), "smile", second))
        assert first.read_bytes() == second.read_bytes(), "renders differ"
        print("PASS: identical inputs give byte-identical smile images")


class TestHeatmapFigure:
    """Band arithmetic, grid assembly, and degenerate grids."""

    def test_default_band_edges(self):
        assert len(DEFAULT_BANDS_FINE) == 9
        assert DEFAULT_BANDS_FINE[0] == pytest.approx(0.002)
        assert DEFAULT_BANDS_FINE[-1] == pytest.approx(0.018)
        assert len(DEFAULT_BANDS_COARSE) == 6
        assert DEFAULT_BANDS_COARSE[0] == pytest.approx(0.005)
        assert DEFAULT_BANDS_COARSE[-1] == pytest.approx(0.03)
        for edges in (DEFAULT_BANDS_FINE, DEFAULT_BANDS_COARSE):
            assert all(a < b for a, b in zip(edges, edges[1:]))
        print("PASS: default bands 0.002..0.018 and 0.005..0.03")

    def test_band_index(self):
        got = band_index([0.0015, 0.002, 0.0021, 1.0], DEFAULT_BANDS_FINE)
        assert list(got) == [0, 1, 1, 9], f"band indices {list(got)}"

    def test_band_shades_darkest_first(self):
        shades = band_shades(10)
        levels = [float(s) for s in shades]
        assert levels[0] == pytest.approx(0.12), "darkest band is the first"
        assert levels[-1] == pytest.approx(0.95)
        assert all(a < b for a, b in zip(levels, levels[1:])), "not monotone"
        assert band_shades(1) == (str(levels[0]),)
        with pytest.raises(ArgumentError, match="at least one"):
            band_shades(0)
        print("PASS: grey bands run darkest (smallest error) to lightest")

    def test_band_labels(self):
        assert band_labels((0.002, 0.004)) == (
            "< 0.002", "0.002 - 0.004", ">= 0.004"
        )

    def test_single_cell_renders(self, tmp_path):
        path = write_surface(tmp_path / "e.csv", [(0.0, 0.125, 0.001)])
        out = tmp_path / "one.png"
        render_heatmap(FigureSpec((path,), "heatmap", out))
        assert out.exists() and out.stat().st_size > 0
        print("PASS: single-cell surface renders a one-cell map")

    def test_missing_cells_masked(self, tmp_path):
        cells = [
            (-0.1, 0.0625, 0.001), (0.0, 0.0625, 0.003), (0.1, 0.0625, 0.02),
            (-0.1, 0.1250, 0.002), (0.1, 0.1250, 0.019),
        ]
        path = write_surface(tmp_path / "e.csv", cells)
        fig, _ = build_heatmap_figure(
            FigureSpec((path,), "heatmap", tmp_path / "o.png")
        )
        plt.close(fig)

    def test_duplicate_cell_rejected(self, tmp_path):
        path = write_surface(
            tmp_path / "e.csv", [(0.0, 0.125, 0.001), (0.0, 0.125, 0.002)]
        )
        with pytest.raises(SchemaError, match="duplicate"):
            build_heatmap_figure(FigureSpec((path,), "heatmap", tmp_path / "o.png"))

    def test_missing_column_named(self, tmp_path):
        path = write_surface(
            tmp_path / "e.csv", [], columns=("log_moneyness", "reset_T")
        )
        with pytest.raises(SchemaError, match="rel_err"):
            build_heatmap_figure(FigureSpec((path,), "heatmap", tmp_path / "o.png"))

    def test_colorbar_ticks_show_edges(self, tmp_path):
        path = write_surface(tmp_path / "e.csv", [(0.0, 0.125, 0.012)])
        edges = (0.005, 0.01, 0.015)
        fig, used = build_heatmap_figure(
            FigureSpec((path,), "heatmap", tmp_path / "o.png", edges)
        )
        try:
            assert used == edges
            labels = [t.get_text() for t in fig.axes[-1].get_yticklabels()]
            assert labels == ["0.005", "0.01", "0.015"], f"tick labels {labels}"
        finally:
            plt.close(fig)

    def test_kind_cross_checked(self, tmp_path):
        smile_spec = FigureSpec(("a.csv",), "smile", tmp_path / "o.png")
        heat_spec = FigureSpec(("a.csv",), "heatmap", tmp_path / "o.png")
        with pytest.raises(ArgumentError, match="expected 'heatmap'"):
            build_heatmap_figure(smile_spec)
        with pytest.raises(ArgumentError, match="expected 'smile'"):
            build_smile_figure(heat_spec)

    def test_byte_identical_rerenders(self, tmp_path):
        cells = [(k / 10.0, T, 0.004 * abs(k))
                 for k in (-1, 0, 1) for T in (0.0625, 0.125)]
        path = write_surface(tmp_path / "e.csv", cells)
        first, second = tmp_path / "a.png", tmp_path / "b.png"
        render_heatmap(FigureSpec((path,), "heatmap", first))
        render_heatmap(FigureSpec((path,), "heatmap", second))
        assert first.read_bytes() == second.read_bytes(), "renders differ"
        print("PASS: identical inputs give byte-identical heatmaps")
