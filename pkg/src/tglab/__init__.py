"""Finite-level computations for Thompson groups acting on lattice gauge data."""

__version__ = "0.1.0"
