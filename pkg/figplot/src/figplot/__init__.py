"""Render empirical-spectral-gap panels from polarslice CSV files."""

from .render import FigureSpec, SchemaError, load_panel, render

__version__ = "0.1.0"

__all__ = ["FigureSpec", "SchemaError", "load_panel", "render"]
