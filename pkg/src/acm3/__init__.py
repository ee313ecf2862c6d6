"""Numerical verification engine for almost contact metric 3-structures."""

__version__ = "0.1.0"
