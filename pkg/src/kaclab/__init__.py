"""Numerical laboratory for Kac's N-particle collision model."""

__version__ = "0.1.0"
