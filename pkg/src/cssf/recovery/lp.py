"""Axis-split linear-programming relaxation of the Dantzig selector.

Replaces complex moduli by ``|Re| + |Im|`` in the objective and by
``max(|Re|, |Im|)`` in the constraint. This is an approximation kept for
speed comparisons; it is not the complex problem.
"""
from __future__ import annotations

import numpy as np
from scipy.optimize import linprog


def solve_dantzig_lp(theta, z, mu):
    """Return ``(s, status, iterations)`` using the HiGHS LP solver."""
    G = theta.conj().T @ theta
    n = G.shape[0]
    P, Q = G.real, G.imag
    R = np.block([[P, -Q], [Q, P]])          # maps (u, w) to (Re Gs, Im Gs)
    zr = np.concatenate([z.real, z.imag])
    # variables x = (u+, u-, w+, w-) >= 0 with (u, w) = (u+ - u-, w+ - w-)
    Ruw = np.hstack([R[:, :n], -R[:, :n], R[:, n:], -R[:, n:]])
    A = np.vstack([Ruw, -Ruw])
    b = np.concatenate([zr + mu, mu - zr])
    res = linprog(np.ones(4 * n), A_ub=A, b_ub=b, bounds=(0, None), method="highs")
    if res.x is None:
        return np.zeros(n, dtype=complex), res.message, int(getattr(res, "nit", 0))
    x = res.x
    s = (x[:n] - x[n:2 * n]) + 1j * (x[2 * n:3 * n] - x[3 * n:])
    return s, "optimal" if res.status == 0 else res.message, int(res.nit)
