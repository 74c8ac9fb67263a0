"""Numerical signatures of Schrodinger-cat states and macroscopic local realism tests."""

__version__ = "0.1.0"
