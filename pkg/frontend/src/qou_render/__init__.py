"""Figure renderer for caplet-experiment CSV artifacts.

Consumes the published CSV schemas (per-reset smile tables and the
relative-error surface) and renders static figures: multi-panel smile
plots in a fixed color convention, and discrete banded heatmaps whose
darkest band marks the smallest errors.
"""

from .errors import ArgumentError, RenderError, SchemaError
from .figures import (
    DEFAULT_BANDS_COARSE,
    DEFAULT_BANDS_FINE,
    SMILE_COLUMNS,
    SMILE_SERIES,
    SURFACE_COLUMNS,
    FigureSpec,
    RenderResult,
    band_index,
    band_labels,
    band_shades,
    build_heatmap_figure,
    build_smile_figure,
    render_heatmap,
    render_smile,
)

__version__ = "0.1.0"

__all__ = [
    "FigureSpec",
    "RenderResult",
    "SMILE_COLUMNS",
    "SMILE_SERIES",
    "SURFACE_COLUMNS",
    "DEFAULT_BANDS_FINE",
    "DEFAULT_BANDS_COARSE",
    "band_index",
    "band_labels",
    "band_shades",
    "build_smile_figure",
    "build_heatmap_figure",
    "render_smile",
    "render_heatmap",
    "RenderError",
    "ArgumentError",
    "SchemaError",
    "__version__",
]
