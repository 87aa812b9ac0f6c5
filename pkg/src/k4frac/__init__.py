"""Explicit fractional K4-decompositions of dense graphs and the exact checks around them."""

__version__ = "0.1.0"
