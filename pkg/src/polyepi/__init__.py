"""Finite generalized polygons and epimorphisms onto thin polygons."""

__version__ = "0.1.0"
