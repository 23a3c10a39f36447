"""Figure rendering for geomphase output directories."""

from .render import FigureSpec, SchemaMismatch, read_csv, render

__version__ = "0.1.0"

__all__ = ["FigureSpec", "SchemaMismatch", "read_csv", "render"]
