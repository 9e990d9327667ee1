"""Numerical noncommutative Fourier analysis on the 3-dimensional Heisenberg group."""

__version__ = "0.1.0"
