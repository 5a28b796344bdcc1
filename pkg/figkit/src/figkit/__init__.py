"""Figure rendering for lookforest CSV/JSON outputs."""

from .render import KINDS, FigureSpec, render, spec_from_json
from .schemas import (
    EquityTable,
    HeatmapTable,
    SchemaError,
    SweepTable,
    read_equity,
    read_heatmap,
    read_report,
    read_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "KINDS",
    "FigureSpec",
    "render",
    "spec_from_json",
    "SchemaError",
    "SweepTable",
    "EquityTable",
    "HeatmapTable",
    "read_sweep",
    "read_equity",
    "read_report",
    "read_heatmap",
    "__version__",
]
