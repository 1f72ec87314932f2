"""Linearised ADMM for the complex Dantzig selector on large grids.

Splits ``y = G s`` with ``G = Theta^H Theta`` applied as two matrix-vector
products, so memory stays at the size of ``Theta``.
"""
from __future__ import annotations

import numpy as np


def _soft(v, thr):
    mag = np.abs(v)
    return np.where(mag > thr, (1 - thr / np.maximum(mag, 1e-300)) * v, 0)


def _clip(v, radius):
    mag = np.abs(v)
    return np.where(mag > radius, v * (radius / np.maximum(mag, 1e-300)), v)


def solve_dantzig_admm(theta, z, mu, rho=1.0, tol=1e-7, max_iter=20000):
    """Return ``(s, iterations, status, primal_res, dual_res)``.

    Residuals are relative to ``max(1, ||z||)``; the constraint holds only to
    that accuracy, unlike the interior-point iterate.
    """
    th_h = theta.conj().T
    rho0 = rho
    gop = lambda v: th_h @ (theta @ v)  # noqa: E731
    # power iteration for ||G||
    rng = np.random.default_rng(0)
    v = rng.standard_normal(theta.shape[1]) + 0j
    for _ in range(50):
        v = gop(v)
        v /= np.linalg.norm(v)
    lip = float(np.real(np.vdot(v, gop(v)))) * 1.01
    step = 1.0 / (rho * lip ** 2)

    n = theta.shape[1]
    s = np.zeros(n, dtype=complex)
    gs = np.zeros(n, dtype=complex)
    y = z + _clip(-z, mu)
    lam = np.zeros(n, dtype=complex)
    status = "max_iter"
    pres = dres = np.inf
    k = 0
    for k in range(1, max_iter + 1):
        grad = gop(gs - y + lam / rho)
        s = _soft(s - step * rho * grad, step)
        gs = gop(s)
        y_old = y
        y = z + _clip(gs + lam / rho - z, mu)
        lam = lam + rho * (gs - y)
        pres = np.linalg.norm(gs - y) / max(1.0, np.linalg.norm(z))
        dres = rho * np.linalg.norm(gop(y - y_old)) / max(1.0, np.linalg.norm(lam))
        if pres <= tol and dres <= tol:
            status = "optimal"
            break
        # residual balancing keeps the two residuals within a factor of 10;
        # rho stays within 1e4 of its start so ill-conditioned G cannot blow it up
        if k % 10 == 0:
            if pres > 10 * dres and rho < 1e4 * rho0:
                rho *= 2.0
            elif dres > 10 * pres and rho > 1e-4 * rho0:
                rho /= 2.0
            step = 1.0 / (rho * lip ** 2)
    return s, k, status, float(pres), float(dres)
