"""Schur-class functions on the disk, the ball, the free semigroup and time-varying windows."""
from . import freeseries, funccalc, kernels, matops, realization, tvsystems

__version__ = "0.1.0"

__all__ = ["freeseries", "funccalc", "kernels", "matops", "realization", "tvsystems"]
