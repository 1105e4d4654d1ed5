"""Exact algebra for semi-free dg algebras, graded complexes, quiver representations and pinwheels."""

__version__ = "0.1.0"
