"""Platonic-symmetric periodic orbits of the N-body problem."""

__version__ = "0.1.0"
