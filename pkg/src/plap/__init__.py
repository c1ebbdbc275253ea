"""Degenerate p-Laplacian two-point problems and comparison-principle checks."""

__version__ = "0.1.0"
