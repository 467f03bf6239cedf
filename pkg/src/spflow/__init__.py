"""Multicommodity flow tools for series-parallel networks."""

__version__ = "0.1.0"
