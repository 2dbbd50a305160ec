"""Harmonic analysis of periodic functions on parallelepiped lattices."""

__version__ = "0.1.0"
