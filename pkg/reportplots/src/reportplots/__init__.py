"""Comparison figures for harness result CSV files."""

from .errors import EmptyData, IoError, ReportPlotsError, SchemaError
from .figures import KINDS, FigureSpec, render_figures
from .loader import COLUMNS, ResultRow, load_results

__version__ = "0.1.0"

__all__ = [
    "COLUMNS",
    "EmptyData",
    "FigureSpec",
    "IoError",
    "KINDS",
    "ReportPlotsError",
    "ResultRow",
    "SchemaError",
    "load_results",
    "render_figures",
    "__version__",
]
