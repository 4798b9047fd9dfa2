"""Eigenvalue spacing statistics for the CUE and GUE."""

__version__ = "0.1.0"
