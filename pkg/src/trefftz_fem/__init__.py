"""Trefftz-type quadrilateral plate, membrane and space-frame finite elements."""

__version__ = "0.1.0"
