"""Publication-style figures drawn from the fitting pipeline's CSV files.

Rendering is a pure function of the inputs: every statistic is computed
upstream, files are consumed through their documented column contracts,
and identical CSVs produce identical images.
"""

from .errors import FiguresError, InvalidOptionError, SchemaError
from .render import build_figure, contains_zero_spans, render
from .spec import KINDS, FigureSpec

__all__ = [
    "KINDS",
    "FigureSpec",
    "FiguresError",
    "InvalidOptionError",
    "SchemaError",
    "build_figure",
    "contains_zero_spans",
    "render",
]

__version__ = "0.1.0"
