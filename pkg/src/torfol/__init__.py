"""Exact symbolic calculus for regular Poisson structures on tori."""

__version__ = "0.1.0"
