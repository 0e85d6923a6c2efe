"""Exact tools for rational points on y^l = x(x+1)...(x+k-1)."""

__version__ = "0.1.0"
