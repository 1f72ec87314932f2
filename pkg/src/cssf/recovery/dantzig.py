"""Complex Dantzig selector front end: scaling, dispatch, feasibility check."""
from __future__ import annotations

import time

import numpy as np

from ..errors import SolverFailure
from .admm import solve_dantzig_admm
from .ipm import solve_dantzig_socp
from .lp import solve_dantzig_lp
from .result import RecoveryResult, SolverStats, log_stats

#: above this many columns the interior-point normal matrix gets too large
IPM_MAX_COLUMNS = 5000
# relative floor (of ||Theta^H r||_inf) substituted for tiny mu so the cone keeps an interior
_MU_FLOOR = 1e-6


def mu_threshold(sensing, sigma2: float, t: float = 1.0) -> float:
    """``(1 + 1/t) * sqrt(2 ln N * sigma2) * sigma_max``.

    ``sensing`` is a :class:`~cssf.sensing.SensingSystem` or a matrix;
    ``sigma_max`` is its largest column norm.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if sigma2 < 0:
        raise ValueError("sigma2 must be non-negative")
    theta = _matrix(sensing)
    n = theta.shape[1]
    if n == 0:
        raise ValueError("sensing matrix has no columns")
    sigma_max = float(np.linalg.norm(theta, axis=0).max())
    return (1 + 1 / t) * np.sqrt(2 * np.log(n) * sigma2) * sigma_max


def _matrix(sensing) -> np.ndarray:
    return sensing.stacked if hasattr(sensing, "stacked") else np.asarray(sensing)


def constraint_violation(theta, r, s, mu) -> float:
    """``max(0, ||Theta^H (r - Theta s)||_inf - mu)``."""
    res = theta.conj().T @ (r - theta @ s)
    return max(0.0, float(np.max(np.abs(res))) - mu)


def dantzig_select(sensing, r, mu: float, method: str = "auto", tol: float = 1e-7,
                   max_iter: int = 200, feas_tol: float = 1e-6) -> RecoveryResult:
    """Solve ``min ||s||_1  s.t.  ||Theta^H (r - Theta s)||_inf <= mu``.

    Both norms use complex moduli. ``method`` is ``"ipm"`` (second-order
    cone interior point), ``"admm"`` (first-order splitting), ``"lp"``
    (real/imaginary axis-split relaxation, an approximation) or ``"auto"``,
    which picks the interior point method up to ``IPM_MAX_COLUMNS`` columns.

    Raises :class:`SolverFailure` if the returned point violates the
    constraint by more than ``feas_tol * mu`` plus a round-off allowance of
    ``1e-9 * ||Theta^H r||_inf``. The ADMM path converges only to its
    residual tolerance, so its allowance is ``10 * tol * ||Theta^H r||_inf``.
    A ``mu`` below ``1e-6 * ||Theta^H r||_inf`` (e.g. noiseless data) is
    raised to that floor; near-singular ``Theta^H Theta`` makes the problem
    with smaller ``mu`` numerically unreachable.
    """
    if mu < 0:
        raise ValueError("mu must be non-negative (negative mu is infeasible)")
    theta = _matrix(sensing)
    r = np.asarray(r, dtype=complex)
    if r.shape != (theta.shape[0],):
        raise ValueError(f"r has shape {r.shape}, expected ({theta.shape[0]},)")
    n = theta.shape[1]
    t0 = time.perf_counter()

    if method == "auto":
        method = "ipm" if n <= IPM_MAX_COLUMNS else "admm"
    if method not in ("ipm", "admm", "lp"):
        raise ValueError(f"unknown method {method!r}")

    # normalise so the largest column has unit norm and ||Theta^H r||_inf = 1
    sigma_max = float(np.linalg.norm(theta, axis=0).max()) if n else 0.0
    zero = np.zeros(n, dtype=complex)
    if sigma_max == 0:
        stats = SolverStats(method, "trivial", 0, wall_time=time.perf_counter() - t0)
        return RecoveryResult(zero, stats, mu)
    th = theta / sigma_max
    zfull = th.conj().T @ r
    scale = float(np.max(np.abs(zfull)))
    if scale == 0 or mu >= scale * sigma_max:
        stats = SolverStats(method, "trivial", 0, wall_time=time.perf_counter() - t0)
        return RecoveryResult(zero, stats, mu)
    z = zfull / scale
    mu_n = max(mu / (sigma_max * scale), _MU_FLOOR)

    if method == "ipm":
        G = th.conj().T @ th
        s_n, info = solve_dantzig_socp(G, z, mu_n, tol=tol, max_iter=max_iter)
        status, iters = info.status, info.iterations
        pres, dres, gap = info.primal_residual, info.dual_residual, info.gap
    elif method == "admm":
        s_n, iters, status, pres, dres = solve_dantzig_admm(th, z, mu_n, tol=tol)
        gap = float("nan")
    else:
        s_n, status, iters = solve_dantzig_lp(th, z, mu_n)
        pres = dres = gap = float("nan")

    s = s_n * scale / sigma_max
    # mu = 0 is solved at the floor, so feasibility is judged there
    mu_eff = max(mu, mu_n * sigma_max * scale)
    viol = constraint_violation(theta, r, s, mu_eff)
    stats = SolverStats(method, status, iters, pres, dres, gap,
                        time.perf_counter() - t0, viol)
    log_stats(stats, n_columns=n, n_rows=theta.shape[0], mu=mu)
    slack = 10 * tol if method == "admm" else 1e-9
    allowed = feas_tol * mu_eff + slack * scale * sigma_max
    if method != "lp" and (viol > allowed or not np.all(np.isfinite(s))):
        raise SolverFailure(
            f"{method} returned an infeasible point (violation {viol:.3e} > {allowed:.3e}, "
            f"status {status})", stats)
    return RecoveryResult(s, stats, mu)
