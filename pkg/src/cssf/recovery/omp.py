"""Orthogonal matching pursuit, used as a fast cross-check of the convex solver."""
from __future__ import annotations

import time

import numpy as np

from .result import RecoveryResult, SolverStats, log_stats


def omp_recover(sensing, r, max_sparsity: int, residual_tol: float = 0.0,
                normalized: bool = True) -> RecoveryResult:
    """Greedy support selection with least-squares refits.

    Each step adds the column maximising ``|p_n^H res|`` (divided by
    ``||p_n||`` when ``normalized``) and refits all selected amplitudes.
    Stops when ``||res|| <= residual_tol`` or ``max_sparsity`` columns are in.
    """
    if max_sparsity < 1:
        raise ValueError("max_sparsity must be >= 1")
    t0 = time.perf_counter()
    theta = sensing.stacked if hasattr(sensing, "stacked") else np.asarray(sensing)
    r = np.asarray(r, dtype=complex)
    norms = np.linalg.norm(theta, axis=0)
    weights = np.where(norms > 0, 1 / np.where(norms > 0, norms, 1), 0) if normalized else 1.0
    n = theta.shape[1]
    support: list[int] = []
    coef = np.zeros(0, dtype=complex)
    res = r.copy()
    status = "max_sparsity"
    while len(support) < max_sparsity:
        if np.linalg.norm(res) <= residual_tol or not np.any(res):
            status = "residual_tol"
            break
        score = np.abs(theta.conj().T @ res) * weights
        score[support] = -1
        k = int(np.argmax(score))
        if score[k] <= 0:
            status = "exhausted"
            break
        support.append(k)
        sub = theta[:, support]
        coef = np.linalg.lstsq(sub, r, rcond=None)[0]
        res = r - sub @ coef
    else:
        if np.linalg.norm(res) <= residual_tol:
            status = "residual_tol"
    s = np.zeros(n, dtype=complex)
    s[support] = coef
    stats = SolverStats("omp", status, len(support), primal_residual=float(np.linalg.norm(res)),
                        wall_time=time.perf_counter() - t0)
    log_stats(stats)
    return RecoveryResult(s, stats)
