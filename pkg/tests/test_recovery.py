import itertools
import logging

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cssf.errors import SolverFailure
from cssf.recovery import (DetectionSet, constraint_violation, dantzig_select, detect,
                           mu_threshold, omp_recover)
from cssf.recovery.ipm import NTScaling, arrow_prod, arrow_solve, jdot, max_step


def instance(seed, n=16, rows=8, k=2):
    g = np.random.default_rng(seed)
    A = (g.standard_normal((rows, n)) + 1j * g.standard_normal((rows, n))) / np.sqrt(2 * rows)
    s = np.zeros(n, complex)
    sup = g.choice(n, k, replace=False)
    s[sup] = (1 + g.random(k)) * np.exp(2j * np.pi * g.random(k))
    return A, s, set(int(i) for i in sup)


def support(v, rel=1e-3):
    v = np.abs(v)
    return set(int(i) for i in np.flatnonzero(v > rel * v.max())) if v.max() > 0 else set()


# -- threshold ---------------------------------------------------------------

def test_mu_threshold_examples():
    A = np.eye(1000)
    assert mu_threshold(A, 1.0) == pytest.approx(2 * np.sqrt(2 * np.log(1000)), rel=1e-12)
    assert mu_threshold(A, 1.0) == pytest.approx(7.434, abs=1e-3)
    assert mu_threshold(A, 0.0) == 0.0
    assert mu_threshold(2 * A, 1.0) == pytest.approx(2 * mu_threshold(A, 1.0))
    with pytest.raises(ValueError):
        mu_threshold(A, -1.0)


# -- Dantzig selector -------------------------------------------------------

def test_zero_data_and_large_mu():
    A, s, _ = instance(0)
    assert np.all(dantzig_select(A, np.zeros(8), 0.1).coefficients == 0)
    r = A @ s
    bound = np.max(np.abs(A.conj().T @ r))
    assert np.all(dantzig_select(A, r, bound).coefficients == 0)


def exhaustive_ls(A, r, k):
    """Best k-sparse least-squares fit over all supports."""
    best = (np.inf, None, None)
    for sup in itertools.combinations(range(A.shape[1]), k):
        cols = A[:, sup]
        coef = np.linalg.lstsq(cols, r, rcond=None)[0]
        res = np.linalg.norm(r - cols @ coef)
        if res < best[0]:
            best = (res, sup, coef)
    return best


@pytest.mark.parametrize("seed", range(10))
def test_small_instance_matches_exhaustive_search(seed):
    A, s, sup = instance(seed)
    r = A @ s
    mu = 1e-6 * np.linalg.norm(A, axis=0).max()
    est = dantzig_select(A, r, mu)
    _, best_sup, coef = exhaustive_ls(A, r, 2)
    assert support(est.coefficients) == set(best_sup) == sup
    ref = np.zeros(16, complex)
    ref[list(best_sup)] = coef
    assert np.max(np.abs(est.coefficients - ref)) < 1e-4
    assert est.stats.status in ("optimal", "inaccurate")


def test_agrees_with_generic_conic_solver():
    cp = pytest.importorskip("cvxpy")
    for seed in range(50):
        A, s, _ = instance(seed)
        r = A @ s + 0.01 * (np.random.default_rng(seed).standard_normal(8))
        mu = 0.02
        ours = dantzig_select(A, r, mu).coefficients
        x = cp.Variable(16, complex=True)
        cp.Problem(cp.Minimize(cp.norm1(x)),
                   [cp.norm_inf(A.conj().T @ (r - A @ x)) <= mu]).solve()
        # compare objectives (the minimiser itself need not be unique)
        assert np.sum(np.abs(ours)) == pytest.approx(np.sum(np.abs(x.value)), rel=1e-4, abs=1e-6)
        assert constraint_violation(A, r, ours, mu) <= 1e-6 * mu + 1e-9


@pytest.mark.parametrize("method", ["ipm", "admm"])
def test_methods_agree(method):
    A, s, sup = instance(3, n=20, rows=14, k=3)
    r = A @ s
    mu = 1e-3
    est = dantzig_select(A, r, mu, method=method)
    assert support(est.coefficients, 1e-2) == sup
    ref = dantzig_select(A, r, mu, method="ipm").coefficients
    assert np.max(np.abs(est.coefficients - ref)) < 1e-3


def test_lp_relaxation_path():
    A, s, sup = instance(5, n=20, rows=14, k=2)
    est = dantzig_select(A, A @ s, 1e-6, method="lp")
    assert support(est.coefficients, 1e-2) == sup


def test_rejects_bad_inputs():
    A, s, _ = instance(0)
    with pytest.raises(ValueError):
        dantzig_select(A, A @ s, -1.0)
    with pytest.raises(ValueError):
        dantzig_select(A, np.zeros(3), 0.1)
    with pytest.raises(ValueError):
        dantzig_select(A, A @ s, 0.1, method="simplex")


def test_iteration_cap_raises_solver_failure():
    A, s, _ = instance(1, n=20, rows=12, k=3)
    with pytest.raises(SolverFailure) as exc:
        dantzig_select(A, A @ s, 1e-6, method="ipm", max_iter=2)
    assert exc.value.stats is not None


def test_stats_are_logged(caplog):
    A, s, _ = instance(2)
    with caplog.at_level(logging.DEBUG, logger="cssf.recovery"):
        dantzig_select(A, A @ s, 1e-3)
    assert any(hasattr(rec, "solver_stats") for rec in caplog.records)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(1e-3, 0.5))
def test_solution_is_feasible_and_no_worse_than_truth(seed, mu):
    A, s, _ = instance(seed, n=12, rows=8, k=2)
    r = A @ s
    est = dantzig_select(A, r, mu).coefficients
    assert constraint_violation(A, r, est, mu) <= 1e-6 * mu + 1e-8
    # the truth is feasible, so the minimiser cannot have a larger l1 norm
    assert np.sum(np.abs(est)) <= np.sum(np.abs(s)) * (1 + 1e-6) + 1e-9


# -- cone algebra ------------------------------------------------------------

def interior(rng, k):
    v = rng.standard_normal((k, 3))
    v[:, 0] = np.linalg.norm(v[:, 1:], axis=1) + rng.random(k) + 0.1
    return v


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_nt_scaling_maps_z_to_inverse_s(seed):
    rng = np.random.default_rng(seed)
    s, z = interior(rng, 6), interior(rng, 6)
    W = NTScaling.compute(s, z)
    assert np.allclose(W.apply(z), W.apply_inv(s), rtol=1e-9, atol=1e-10)
    assert np.allclose(W.apply_inv(W.apply(s)), s, atol=1e-10)
    M = W.inv_sq_matrices()
    ref = W.apply_inv(W.apply_inv(s))
    assert np.allclose(np.einsum("kij,kj->ki", M, s), ref, atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_arrow_solve_inverts_product(seed):
    rng = np.random.default_rng(seed)
    lam = interior(rng, 5)
    y = rng.standard_normal((5, 3))
    assert np.allclose(arrow_solve(lam, arrow_prod(lam, y)), y, atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_max_step_reaches_boundary(seed):
    rng = np.random.default_rng(seed)
    x = interior(rng, 8)
    d = rng.standard_normal((8, 3)) * 5
    a = max_step(x, d)
    for i in range(8):
        if np.isfinite(a[i]):
            p = x[i] + a[i] * d[i]
            assert abs(jdot(p[None], p[None])[0]) < 1e-7 * max(1.0, np.sum(p ** 2))
            q = x[i] + 0.999 * a[i] * d[i]
            assert q[0] >= np.linalg.norm(q[1:]) - 1e-12
        else:
            for t in (1.0, 10.0, 1e3):
                q = x[i] + t * d[i]
                assert q[0] >= np.linalg.norm(q[1:]) - 1e-9


# -- detection and OMP -------------------------------------------------------

def test_detect_examples():
    assert list(detect(np.array([1.0, 0.5, 0.05]), 0.3).indices) == [0, 1]
    assert list(detect(np.array([0.2, 1.0, 1.0]), 1.0).indices) == [1, 2]
    assert len(detect(np.zeros(4), 0.5).indices) == 0
    d = detect(np.array([0.0, -2.0, 1.0]), 0.9)
    assert isinstance(d, DetectionSet) and list(d.indices) == [1]


def test_omp_examples():
    A, _, _ = instance(4)
    res = omp_recover(A, 3.0 * A[:, 5], 3, residual_tol=1e-10)
    assert support(res.coefficients) == {5}
    assert res.coefficients[5] == pytest.approx(3.0)
    assert len(support(omp_recover(A, np.zeros(8), 2).coefficients)) == 0


@pytest.mark.parametrize("seed", range(10))
def test_omp_agrees_with_dantzig(seed):
    A, s, sup = instance(seed)
    r = A @ s
    omp = omp_recover(A, r, 2).coefficients
    dz = dantzig_select(A, r, 1e-6 * np.linalg.norm(A, axis=0).max()).coefficients
    assert support(omp) == support(dz) == sup
