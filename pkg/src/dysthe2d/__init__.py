"""Numerical laboratory for the two-dimensional Dysthe equation."""

__version__ = "0.1.0"
