"""Numerical toolkit for null strings, Petrov-Penrose types and intersection optics
of four-dimensional complex and neutral-signature metrics."""

__version__ = "0.1.0"
