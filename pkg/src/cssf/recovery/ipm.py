"""Primal-dual interior-point solver for the complex Dantzig selector.

Solves::

    minimize    sum_n t_n
    subject to  |s_n| <= t_n                    n = 1..N
                |(z - G s)_i| <= mu             i = 1..N

with ``G`` Hermitian (``Theta^H Theta``) and ``z = Theta^H r``. Every
constraint is a 3-dimensional second-order cone, so the problem is a
standard-form cone program ``min c'x  s.t.  Gc x + s = h, s in K`` over the
real variable ``x = (u, w, t)`` where ``s = u + jw``.

The method is Mehrotra predictor-corrector with Nesterov-Todd scaling. The
normal matrix ``Gc' W^-2 Gc`` is formed from the real representation of
``G``; the ``t`` block is diagonal and eliminated before a dense Cholesky
factorisation of the ``2N x 2N`` remainder.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy import linalg

_J = np.array([1.0, -1.0, -1.0])
# refinement sweeps on the full KKT system per Newton solve
_REFINE = 2
# iterations without improving the best iterate before giving up
_STALL = 15
# looser tolerances accepted as "inaccurate" when full accuracy is out of reach
_INACC = 100.0


@dataclass
class IpmInfo:
    status: str
    iterations: int
    primal_residual: float
    dual_residual: float
    gap: float
    wall_time: float


# ---------------------------------------------------------------- cone algebra
# All cone quantities are arrays of shape (K, 3), one row per 3-d cone.

def jdot(x, y):
    return x[:, 0] * y[:, 0] - x[:, 1] * y[:, 1] - x[:, 2] * y[:, 2]


def arrow_prod(x, y):
    """Jordan product ``x o y = (x'y, x0 y1 + y0 x1)``."""
    out = np.empty_like(x)
    out[:, 0] = np.sum(x * y, axis=1)
    out[:, 1:] = x[:, :1] * y[:, 1:] + y[:, :1] * x[:, 1:]
    return out


def arrow_solve(lam, r):
    """Solve ``lam o y = r`` for ``y``."""
    det = lam[:, 0] ** 2 - lam[:, 1] ** 2 - lam[:, 2] ** 2
    y = np.empty_like(r)
    y[:, 0] = (lam[:, 0] * r[:, 0] - lam[:, 1] * r[:, 1] - lam[:, 2] * r[:, 2]) / det
    y[:, 1:] = (r[:, 1:] - lam[:, 1:] * y[:, :1]) / lam[:, :1]
    return y


@dataclass
class NTScaling:
    """Per-cone Nesterov-Todd scaling ``W = beta (2 v v' - J)``."""

    beta: np.ndarray
    v: np.ndarray

    @classmethod
    def compute(cls, s, z):
        ns = np.sqrt(jdot(s, s))
        nz = np.sqrt(jdot(z, z))
        sb = s / ns[:, None]
        zb = z / nz[:, None]
        gamma = np.sqrt((1.0 + np.sum(sb * zb, axis=1)) / 2.0)
        wb = (sb + zb * _J) / (2.0 * gamma[:, None])
        v = wb.copy()
        v[:, 0] += 1.0
        v /= np.sqrt(2.0 * (wb[:, 0] + 1.0))[:, None]
        return cls(np.sqrt(ns / nz), v)

    @classmethod
    def identity(cls, k):
        v = np.zeros((k, 3))
        v[:, 0] = 1.0
        return cls(np.ones(k), v)

    def apply(self, x):
        return self.beta[:, None] * (2.0 * self.v * np.sum(self.v * x, axis=1)[:, None] - x * _J)

    def apply_inv(self, x):
        jv = self.v * _J
        return (2.0 * jv * np.sum(jv * x, axis=1)[:, None] - x * _J) / self.beta[:, None]

    def inv_sq_matrices(self):
        """Explicit ``W^-2`` for every cone, shape ``(K, 3, 3)``."""
        jv = self.v * _J
        winv = 2.0 * jv[:, :, None] * jv[:, None, :] - np.diag(_J)[None]
        winv /= self.beta[:, None, None]
        return winv @ winv


def max_step(x, d):
    """Largest ``alpha`` keeping ``x + alpha d`` in the (closed) cone, per cone."""
    a = jdot(d, d)
    b = jdot(x, d)
    c = jdot(x, x)
    alpha = np.full(x.shape[0], np.inf)
    disc = b * b - a * c
    lin = np.abs(a) <= 1e-14 * (np.abs(b) + np.abs(c) + 1e-300)
    # linear case: c + 2 b alpha = 0
    m = lin & (b < 0)
    alpha[m] = -c[m] / (2 * b[m])
    quad = ~lin & (disc >= 0)
    sq = np.sqrt(np.where(quad, disc, 0.0))
    # numerically stable roots of a alpha^2 + 2 b alpha + c
    qq = -(b + np.copysign(sq, b))
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = np.where(quad, qq / a, np.inf)
        r2 = np.where(quad & (qq != 0), c / qq, np.inf)
    for r in (r1, r2):
        ok = quad & (r > 0)
        alpha[ok] = np.minimum(alpha[ok], r[ok])
    # also guard against the ray crossing into -K through the apex
    neg0 = d[:, 0] < 0
    alpha[neg0] = np.minimum(alpha[neg0], -x[neg0, 0] / d[neg0, 0])
    return alpha


def _shift_interior(x):
    t = np.max(np.sqrt(x[:, 1] ** 2 + x[:, 2] ** 2) - x[:, 0])
    if t >= 0:
        x = x.copy()
        x[:, 0] += 1.0 + t
    return x


# ------------------------------------------------------------- problem maps

class _Problem:
    def __init__(self, G: np.ndarray, z: np.ndarray, mu: float):
        self.G = G
        self.N = n = G.shape[0]
        self.P = np.ascontiguousarray(G.real)
        self.Q = np.ascontiguousarray(G.imag)
        self.h = np.zeros((2 * n, 3))
        self.h[n:, 0] = mu
        self.h[n:, 1] = z.real
        self.h[n:, 2] = z.imag
        self.c = np.concatenate([np.zeros(2 * n), np.ones(n)])
        # real representation [[P, -Q], [Q, P]] split into top and bottom halves
        self.R_top = np.hstack([self.P, -self.Q])
        self.R_bot = np.hstack([self.Q, self.P])

    def gc(self, x):
        n = self.N
        u, w, t = x[:n], x[n:2 * n], x[2 * n:]
        out = np.empty((2 * n, 3))
        out[:n, 0] = -t
        out[:n, 1] = -u
        out[:n, 2] = -w
        gs = self.G @ (u + 1j * w)
        out[n:, 0] = 0.0
        out[n:, 1] = gs.real
        out[n:, 2] = gs.imag
        return out

    def gct(self, y):
        n = self.N
        gy = self.G @ (y[n:, 1] + 1j * y[n:, 2])
        return np.concatenate([gy.real - y[:n, 1], gy.imag - y[:n, 2], -y[:n, 0]])

    def factor(self, winv2):
        """Factor ``Gc' W^-2 Gc`` after eliminating ``t``."""
        n = self.N
        A = winv2[:n]
        B = winv2[n:]
        d11, d12, d22 = B[:, 1, 1], B[:, 1, 2], B[:, 2, 2]
        top = d11[:, None] * self.R_top + d12[:, None] * self.R_bot
        bot = d12[:, None] * self.R_top + d22[:, None] * self.R_bot
        H = self.R_top.T @ top + self.R_bot.T @ bot
        a00 = A[:, 0, 0]
        a0u, a0w = A[:, 0, 1], A[:, 0, 2]
        idx = np.arange(n)
        H[idx, idx] += A[:, 1, 1] - a0u * a0u / a00
        H[idx + n, idx + n] += A[:, 2, 2] - a0w * a0w / a00
        off = A[:, 1, 2] - a0u * a0w / a00
        H[idx, idx + n] += off
        H[idx + n, idx] += off
        try:
            chol = linalg.cho_factor(H, lower=True, check_finite=False)
            solve_uw = lambda b: linalg.cho_solve(chol, b, check_finite=False)  # noqa: E731
        except linalg.LinAlgError:
            lu = linalg.lu_factor(H, check_finite=False)
            solve_uw = lambda b: linalg.lu_solve(lu, b, check_finite=False)  # noqa: E731

        def solve(b):
            bu, bw, bt = b[:n], b[n:2 * n], b[2 * n:]
            rhs = np.concatenate([bu - a0u * bt / a00, bw - a0w * bt / a00])
            uw = solve_uw(rhs)
            t = (bt - a0u * uw[:n] - a0w * uw[n:]) / a00
            return np.concatenate([uw, t])

        return solve


def solve_dantzig_socp(G, z, mu, tol=1e-7, feastol=1e-9, max_iter=200):
    """Run the interior-point method; returns ``(s, info)``.

    Stops once the primal residual is below ``feastol`` and the dual
    residual and duality gap (absolute or relative) are below ``tol``
    (status ``"optimal"``). Nearly rank-deficient ``G`` with tiny ``mu``
    makes the dual degenerate; when the iterates stop improving the best
    iterate is returned, flagged ``"inaccurate"`` if it meets the tolerances
    relaxed by a factor of 100 and ``"stalled"``/``"max_iter"`` otherwise.

    ``mu`` must be strictly positive. Inputs are expected to be scaled so
    that ``G`` has unit-order entries.
    """
    t0 = time.perf_counter()
    prob = _Problem(np.asarray(G, dtype=complex), np.asarray(z, dtype=complex), float(mu))
    n = prob.N
    K = 2 * n
    h, c = prob.h, prob.c

    # least-norm starting point, then push slacks into the cone interior
    ident = NTScaling.identity(K)
    solve0 = prob.factor(ident.inv_sq_matrices())
    x = solve0(prob.gct(h))
    s = _shift_interior(h - prob.gc(x))
    z_ = _shift_interior(-prob.gc(solve0(c)))

    hnorm = max(1.0, np.linalg.norm(h))
    cnorm = max(1.0, np.linalg.norm(c))
    status = "max_iter"
    best = (np.inf, x, np.inf, np.inf, np.inf)
    best_it = 0
    pres = dres = gap = np.inf
    it = 0
    for it in range(max_iter + 1):
        rx = c + prob.gct(z_)
        rz = s + prob.gc(x) - h
        gap = float(np.sum(s * z_))
        pcost = float(c @ x)
        pres = np.linalg.norm(rz) / hnorm
        dres = np.linalg.norm(rx) / cnorm
        gap_ok = gap <= tol or gap <= tol * abs(pcost)
        if pres <= feastol and dres <= tol and gap_ok:
            status = "optimal"
            break
        score = max(pres / feastol, dres / tol, min(gap, gap / max(abs(pcost), 1e-300)) / tol)
        if score < best[0]:
            best = (score, x.copy(), pres, dres, gap)
            best_it = it
        elif it - best_it >= _STALL:
            status = "stalled"
            break
        if it == max_iter:
            break

        W = NTScaling.compute(s, z_)
        lam = W.apply(z_)
        solve = prob.factor(W.inv_sq_matrices())

        def kkt(bx, bz):
            # [0 Gc'; Gc -W'W] [dx; dz] = [bx; bz], refined on the full system
            dx = np.zeros_like(bx)
            dz = np.zeros_like(bz)
            ex, ez = bx, bz
            for _ in range(1 + _REFINE):
                cx = solve(ex + prob.gct(W.apply_inv(W.apply_inv(ez))))
                cz = W.apply_inv(W.apply_inv(prob.gc(cx) - ez))
                dx, dz = dx + cx, dz + cz
                ex = bx - prob.gct(dz)
                ez = bz - prob.gc(dx) + W.apply(W.apply(dz))
            return dx, dz

        def newton(rc):
            rho = arrow_solve(lam, rc)
            wrho = W.apply(rho)
            dx, dz = kkt(-rx, -(rz + wrho))
            ds = W.apply(rho - W.apply(dz))
            return dx, ds, dz

        lamlam = arrow_prod(lam, lam)
        dxa, dsa, dza = newton(-lamlam)
        alpha_a = min(1.0, float(np.min(max_step(s, dsa))), float(np.min(max_step(z_, dza))))
        sigma = (1.0 - alpha_a) ** 3
        mu_gap = gap / K
        rc = -lamlam - arrow_prod(W.apply_inv(dsa), W.apply(dza))
        rc[:, 0] += sigma * mu_gap
        dx, ds, dz = newton(rc)
        alpha = min(1.0, 0.99 * min(float(np.min(max_step(s, ds))),
                                    float(np.min(max_step(z_, dz)))))
        x = x + alpha * dx
        s = s + alpha * ds
        z_ = z_ + alpha * dz
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(s)) and np.all(np.isfinite(z_))
                and np.all(jdot(s, s) > 0) and np.all(jdot(z_, z_) > 0)):
            status = "numerical_error"
            break

    if status != "optimal":
        # fall back to the best iterate seen; callers check its quality
        score, x, pres, dres, gap = best
        if score <= _INACC:
            status = "inaccurate"

    u, w = x[:n], x[n:2 * n]
    info = IpmInfo(status, it, float(pres), float(dres), float(gap),
                   time.perf_counter() - t0)
    return u + 1j * w, info
