import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cssf.coherence import (approximation_error, coherence, coherence_lsfr,
                            coherence_rsfr_expected, coherence_study, column_correlation,
                            correlation_terms, dirichlet_ratio, min_pulses, rho, rho_rel,
                            write_coherence_csv)
from cssf.config import C, RadarConfig, linear_steps
from cssf.errors import NotAchievable
from cssf.geometry import GridPoints, place_nodes_uniform_disk
from cssf.sensing import MeasurementMatrix, build_sensing_system, gaussian_measurements
from cssf.waveform import hadamard_waveforms

from conftest import loop_column, small_config


def test_self_correlation_is_energy(small_scene):
    cfg, layout, x = small_scene
    pts = GridPoints([0.1, 0.2], [0.0, 20.0], [150.0, 300.0])
    sysm = build_sensing_system(pts, layout, x, cfg, gaussian_measurements(cfg, layout.n_r, 1))
    v = column_correlation(sysm, 0, 0)
    assert v.imag == 0 and v.real == pytest.approx(np.linalg.norm(sysm.stacked[:, 0]) ** 2)
    assert coherence(sysm, 1, 1) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        column_correlation(sysm, 0, 5)


def test_disjoint_supports_are_orthogonal(small_scene):
    cfg, layout, x = small_scene
    # delays 0 and 40 samples apart by more than L=32 samples
    pts = GridPoints([0.1, 0.1], [0.0, 0.0], [0.0, 600.0])
    eye = [MeasurementMatrix.identity(cfg.window)] * layout.n_r
    sysm = build_sensing_system(pts, layout, x, cfg, eye)
    assert abs(column_correlation(sysm, 0, 1)) == 0


def test_correlation_against_brute_force_expansion(small_scene):
    cfg, layout, x = small_scene
    phis = gaussian_measurements(cfg, layout.n_r, 3)
    p1, p2 = (0.1, 10.0, 150.0), (-0.2, 30.0, 172.5)
    pts = GridPoints(*zip(p1, p2))
    sysm = build_sensing_system(pts, layout, x, cfg, phis)
    ref = 0
    for l in range(layout.n_r):
        for m in range(cfg.n_pulses):
            a = phis[l].entries @ loop_column(p1, l, m, layout, x, cfg)
            b = phis[l].entries @ loop_column(p2, l, m, layout, x, cfg)
            ref += np.sum(np.conj(b) * a)
    assert column_correlation(sysm, 0, 1) == pytest.approx(ref, rel=1e-9)


def test_rho_examples(small_scene):
    cfg, _, x = small_scene
    eye = MeasurementMatrix.identity(cfg.window)
    k = (0.0, 0.0, 150.0)
    assert rho(k, k, x, eye, cfg) == pytest.approx(x.m_t)
    assert rho(k, (0.0, 0.0, 700.0), x, eye, cfg) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        rho(k, (0.1, 0.0, 150.0), x, eye, cfg)


def test_rho_expectation_over_projections(small_scene):
    cfg, _, x = small_scene
    k = (0.0, 0.0, 150.0)
    vals = [rho(k, k, x, MeasurementMatrix.gaussian(cfg.m_compressed, cfg.window, d), cfg)
            for d in range(800)]
    assert np.mean(vals) == pytest.approx(x.m_t * cfg.m_compressed / cfg.window, rel=0.05)


def test_dirichlet_examples():
    assert dirichlet_ratio(1e-9, 1e6, 12) == pytest.approx(1.0)
    assert dirichlet_ratio(5.0, 1e6, 30) == pytest.approx(0.0, abs=1e-12)
    for dd in (1.0, 7.5, 33.0):
        assert dirichlet_ratio(dd, 4e6, 1) == pytest.approx(1.0)
    assert coherence_lsfr(5.0, 1e6, 30, rho_rel=0.5) == pytest.approx(0.0, abs=1e-12)
    assert coherence_lsfr(0.0, 1e6, 30, rho_rel=0.5) == pytest.approx(0.5)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.5, 200.0), st.floats(1e5, 1e7), st.integers(1, 40))
def test_dirichlet_against_direct_sum(dd, df, n):
    a = -4 * np.pi * dd * df / C
    direct = abs(np.sum(np.exp(1j * a * np.arange(n)))) / n
    assert dirichlet_ratio(dd, df, n) == pytest.approx(direct, abs=1e-9)


def test_rsfr_expectation_limits():
    assert coherence_rsfr_expected(0.0, 4e6, 12, 0.8) == pytest.approx(0.64)
    assert coherence_rsfr_expected(1e4, 8e6, 25) == pytest.approx(1 / 25, rel=0.01)
    assert coherence_rsfr_expected(7.5, 4e6, 1) == pytest.approx(1.0)


@pytest.mark.parametrize("dd,df,n", [(7.5, 1e6, 5), (7.5, 4e6, 12), (2.0, 8e6, 20)])
def test_rsfr_expectation_monte_carlo(dd, df, n):
    g = np.random.default_rng(1)
    a = -4 * np.pi * dd / C
    steps = g.uniform(0, (n - 1) * df, (20000, n))
    mc = np.mean(np.abs(np.sum(np.exp(1j * a * steps), axis=1)) ** 2) / n ** 2
    assert coherence_rsfr_expected(dd, df, n) == pytest.approx(mc, rel=0.05)


def test_min_pulses():
    grid = [1000.0, 1005.0]
    assert min_pulses(1.0, 1e6, grid) == 1
    assert min_pulses(0.01, 1e6, grid) <= 30
    n = min_pulses(0.01, 1e6, grid)
    assert dirichlet_ratio(5.0, 1e6, n) <= 0.01
    assert all(dirichlet_ratio(5.0, 1e6, k) > 0.01 for k in range(1, n))
    # offsets of c / (2 df) keep every pulse in phase: never decorrelates
    with pytest.raises(NotAchievable):
        min_pulses(0.5, 1e6, [1000.0, 1150.0], cap=200)
    with pytest.raises(ValueError):
        min_pulses(0.0, 1e6, grid)


def test_approximation_error_structure():
    cfg = RadarConfig(step_schedule=tuple(linear_steps(4e6, 6)))
    x1 = hadamard_waveforms(512, 1)
    lay1 = place_nodes_uniform_disk(10.0, 1, 1, 2)
    phi = MeasurementMatrix.gaussian(10, cfg.window, 0)
    k, k2 = (0.0, 0.0, 1050.0), (0.0, 0.0, 1057.5)
    assert approximation_error(k, k2, x1, phi, cfg, lay1) == 0
    x = hadamard_waveforms(512, 10)
    lay = place_nodes_uniform_disk(10.0, 10, 1, 2)
    diag, cross = correlation_terms(k, k2, x, phi, cfg, lay)
    # exact correlation of the two compressed columns equals diag + cross
    pts = GridPoints([0.0, 0.0], [0.0, 0.0], [1050.0, 1057.5])
    sysm = build_sensing_system(pts, lay, x, cfg, [phi])
    assert diag + cross == pytest.approx(column_correlation(sysm, 0, 1), rel=1e-9)


def test_single_waveform_study_matches_closed_form(tmp_path):
    base = RadarConfig(noise_var=0.0)
    res = coherence_study(4e6, [2, 5, 12], 3, 0, base, m_t=1)
    for rep in res["linear"]:
        assert rep.numeric == pytest.approx(rep.theory, rel=1e-8, abs=1e-12)
    assert len(res["random"]) == 3 and all(len(r.pairs) == 3 for r in res["random"])
    p = tmp_path / "c.csv"
    write_coherence_csv(p, res["linear"] + res["random"])
    assert len(p.read_text().splitlines()) == 7
