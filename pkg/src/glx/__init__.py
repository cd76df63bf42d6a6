"""Boundary value problems on graphs at finite dimension."""

__version__ = "0.1.0"
