"""Figure rendering for wavesplit experiment CSV output."""

from .figures import KINDS, FigureError, FigureSpec, extract_series, load_rows, render

__version__ = "0.1.0"
