"""Boundary-problem solver for a small cubical language."""

__version__ = "0.1.0"
