"""Sparse recovery: Dantzig selector, OMP and threshold detection."""
from .dantzig import constraint_violation, dantzig_select, mu_threshold
from .omp import omp_recover
from .result import DetectionSet, RecoveryResult, SolverStats, detect

__all__ = ["DetectionSet", "RecoveryResult", "SolverStats", "constraint_violation",
           "dantzig_select", "detect", "mu_threshold", "omp_recover"]
