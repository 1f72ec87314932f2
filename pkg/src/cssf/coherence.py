"""Sensing-matrix coherence: numeric values, closed forms and pulse budgeting.

Column indices are 0-based positions in the sensing system.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .config import C, RadarConfig, linear_steps
from .errors import NotAchievable
from .geometry import GridPoints, NodeLayout, place_nodes_uniform_disk
from .rng import stream
from .sensing import MeasurementMatrix, basis_matrix
from .synthesis import delay_bin
from .waveform import WaveformMatrix


def column_correlation(sensing, k: int, k2: int) -> complex:
    """``<p_k, p_k2> = p_k2^H p_k`` for stacked sensing columns."""
    theta = sensing.stacked if hasattr(sensing, "stacked") else np.asarray(sensing)
    n = theta.shape[1]
    if not (0 <= k < n and 0 <= k2 < n):
        raise ValueError(f"column index outside [0, {n})")
    return complex(np.vdot(theta[:, k2], theta[:, k]))


def coherence(sensing, k: int, k2: int) -> float:
    """Normalised column correlation ``|<p_k, p_k2>| / (||p_k|| ||p_k2||)``."""
    theta = sensing.stacked if hasattr(sensing, "stacked") else np.asarray(sensing)
    a, b = theta[:, k], theta[:, k2]
    return abs(np.vdot(b, a)) / (np.linalg.norm(a) * np.linalg.norm(b))


def _shifted(x: WaveformMatrix, tau: int, window: int) -> np.ndarray:
    out = np.zeros((window, x.m_t), dtype=complex)
    out[tau:tau + x.length] = x.samples
    return out


def _same_angle_speed(p, p2):
    if not (np.isclose(p[0], p2[0], rtol=0, atol=1e-12) and np.isclose(p[1], p2[1], rtol=0, atol=1e-12)):
        raise ValueError("points must share angle and speed (range-only offset)")


def rho(k, k2, x: WaveformMatrix, phi: MeasurementMatrix, cfg: RadarConfig) -> float:
    """Waveform-diagonal correlation ``|sum_i (Phi C_k2 x_i)^H (Phi C_k x_i)|``.

    ``k`` and ``k2`` are grid points ``(angle, speed, range)`` that differ in
    range only.
    """
    _same_angle_speed(k, k2)
    t1 = delay_bin(k[2], cfg.ts, cfg.l_pad, cfg.range_origin)
    t2 = delay_bin(k2[2], cfg.ts, cfg.l_pad, cfg.range_origin)
    g1 = phi.apply(_shifted(x, t1, cfg.window))
    g2 = phi.apply(_shifted(x, t2, cfg.window))
    return float(abs(np.sum(np.conj(g2) * g1)))


def rho_rel(k, k2, x, phi, cfg) -> float:
    """``rho_kk2 / sqrt(rho_kk rho_k2k2)``."""
    return rho(k, k2, x, phi, cfg) / np.sqrt(rho(k, k, x, phi, cfg) * rho(k2, k2, x, phi, cfg))


def _alpha(delta_d):
    return -4 * np.pi * np.asarray(delta_d, dtype=float) / C


def dirichlet_ratio(delta_d, delta_f, n_pulses):
    """``|1 - exp(j a N)| / (N |1 - exp(j a)|)`` with ``a = -4 pi dd df / c``.

    Equals 1 wherever ``a`` is a multiple of ``2 pi`` (continuous limit).
    """
    a = _alpha(delta_d) * delta_f
    half = np.sin(a / 2)
    num = np.abs(np.sin(n_pulses * a / 2))
    with np.errstate(divide="ignore", invalid="ignore"):
        r = num / (n_pulses * np.abs(half))
    return np.where(np.abs(half) < 1e-12, 1.0, r)


def coherence_lsfr(delta_d, delta_f, n_pulses: int, rho_rel: float = 1.0):
    """Closed-form coherence of two range-offset columns under linear steps."""
    if n_pulses < 1:
        raise ValueError("n_pulses must be >= 1")
    if not delta_f > 0:
        raise ValueError("delta_f must be positive")
    out = dirichlet_ratio(delta_d, delta_f, n_pulses) * rho_rel
    return float(out) if np.ndim(out) == 0 else out


def coherence_rsfr_expected(delta_d, delta_f, n_pulses: int, rho_rel: float = 1.0):
    """Expected squared coherence for i.i.d. uniform steps on ``[0, (N_p - 1) delta_f]``."""
    if n_pulses < 1:
        raise ValueError("n_pulses must be >= 1")
    dd = np.asarray(delta_d, dtype=float)
    n = n_pulses
    if n == 1:
        extra = np.zeros_like(dd)
    else:
        x = 0.5 * (n - 1) * _alpha(dd) * delta_f
        with np.errstate(divide="ignore", invalid="ignore"):
            sinc2 = np.where(np.abs(x) < 1e-12, 1.0, (np.sin(x) / np.where(x == 0, 1, x)) ** 2)
        # sin^2(x) / ((N-1) (x / (N-1))^2) = (N-1) sinc^2(x)
        extra = (n - 1) * sinc2
    out = rho_rel ** 2 / n * (1 + extra)
    return float(out) if np.ndim(out) == 0 else out


def min_pulses(mu_t: float, delta_f: float, grid, rho_rel_fn=None, cap: int = 1000) -> int:
    """Smallest ``N_p`` whose linear-step coherence bound is ``<= mu_t``
    for every pair of distinct grid ranges.

    ``rho_rel_fn(delta_d)`` supplies the waveform correlation ratio of a
    range offset (default 1). Raises :class:`NotAchievable` if no
    ``N_p <= cap`` qualifies.
    """
    if not 0 < mu_t <= 1:
        raise ValueError("mu_t must lie in (0, 1]")
    ranges = np.unique(np.asarray(grid.ranges if hasattr(grid, "ranges") else grid, dtype=float))
    diffs = np.unique(np.abs(ranges[:, None] - ranges[None, :])[np.triu_indices(ranges.size, 1)])
    rr = np.array([1.0 if rho_rel_fn is None else float(rho_rel_fn(d)) for d in diffs])
    for n in range(1, cap + 1):
        if diffs.size == 0 or np.all(dirichlet_ratio(diffs, delta_f, n) * rr <= mu_t + 1e-12):
            return n
    raise NotAchievable(f"no N_p <= {cap} reaches coherence {mu_t}")


def _waveform_blocks(point, x, phi, cfg, layout):
    """``(N_p, M_t, M)`` array of ``Phi D_m C_tau x_i`` and the per-pulse tx phases."""
    a, b, c = point
    tau = delay_bin(c, cfg.ts, cfg.l_pad, cfg.range_origin)
    sx = _shifted(x, tau, cfg.window)                      # (W, Mt)
    t = np.arange(cfg.window) * cfg.ts
    f = cfg.carriers
    g = np.empty((f.size, x.m_t, phi.rows), dtype=complex)
    for m, f_m in enumerate(f):
        d = np.exp(2j * np.pi * 2 * b * f_m / C * t)
        g[m] = phi.apply(d[:, None] * sx).T
    eta = layout.eta_tx(a)                                  # (Mt,)
    return g, eta


def correlation_terms(k, k2, x, phi, cfg, layout: NodeLayout):
    """Split ``<p_k, p_k2>`` (one receive node) into waveform-diagonal and
    cross-waveform parts; returns ``(diagonal, cross)``.

    ``k`` and ``k2`` are range-offset grid points.
    """
    _same_angle_speed(k, k2)
    g1, eta = _waveform_blocks(k, x, phi, cfg, layout)
    g2, _ = _waveform_blocks(k2, x, phi, cfg, layout)
    f = cfg.carriers
    dd = k[2] - k2[2]
    gram = np.einsum("mjr,mir->mij", np.conj(g2), g1)       # [m, i, i'] = g2_{i'}^H g1_i
    steer = np.exp(2j * np.pi * f[:, None, None] * (eta[:, None] - eta[None, :])[None] / C)
    weights = np.exp(-4j * np.pi * f * dd / C)
    full = gram * steer * weights[:, None, None]
    diag = complex(np.einsum("mii->", full))
    return diag, complex(full.sum()) - diag


def approximation_error(k, k2, x, phi, cfg, layout: NodeLayout, schedule=None) -> complex:
    """Cross-waveform term dropped when coherence is reduced to the closed forms."""
    if schedule is not None:
        cfg = cfg.with_(step_schedule=tuple(schedule))
    return correlation_terms(k, k2, x, phi, cfg, layout)[1]


@dataclass(frozen=True)
class PairCoherence:
    k: int
    k2: int
    numeric: float
    theory: float
    delta_d: float
    delta_v: float


@dataclass
class CoherenceReport:
    """Squared coherence of one column pair for one schedule family and ``N_p``.

    ``pairs`` holds one entry per Monte Carlo draw; ``numeric`` and
    ``theory`` are their means.
    """

    schedule_kind: str
    n_pulses: int
    delta_f: float
    pairs: list = field(default_factory=list)

    def __post_init__(self):
        if self.schedule_kind not in ("linear", "random"):
            raise ValueError("schedule_kind must be 'linear' or 'random'")

    @property
    def numeric(self) -> float:
        return float(np.mean([p.numeric for p in self.pairs]))

    @property
    def theory(self) -> float:
        return float(np.mean([p.theory for p in self.pairs]))


def write_coherence_csv(path, reports) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["Np", "delta_f", "kind", "numeric", "theory"])
        for r in reports:
            w.writerow([r.n_pulses, repr(r.delta_f), r.schedule_kind, repr(r.numeric), repr(r.theory)])


def coherence_study(delta_f: float, n_pulses_list, draws: int, seed, base: RadarConfig,
                    m_t: int = 10, radius: float = 10.0, angle: float = 0.0,
                    ranges=(1050.0, 1057.5), x: WaveformMatrix | None = None):
    """Monte Carlo squared coherence of two range-adjacent columns (one rx node).

    Every draw uses a fresh node layout, measurement matrix and, for the
    random family, a fresh step schedule on ``[0, (N_p - 1) delta_f]``.
    Theory values use the realised waveform correlation ratio of the draw.
    Returns ``{"linear": [...], "random": [...]}`` lists of reports.
    """
    from .waveform import hadamard_waveforms

    x = hadamard_waveforms(base.l_samples, m_t) if x is None else x
    n_list = sorted(int(n) for n in n_pulses_list)
    n_max = n_list[-1]
    pts = GridPoints([angle, angle], [0.0, 0.0], list(ranges))
    p1, p2 = (angle, 0.0, ranges[0]), (angle, 0.0, ranges[1])
    dd = ranges[0] - ranges[1]
    out = {"linear": [CoherenceReport("linear", n, delta_f) for n in n_list],
           "random": [CoherenceReport("random", n, delta_f) for n in n_list]}

    def cols(cfg, layout, phi):
        blocks = [phi.apply(basis_matrix(pts, 0, m, layout, x, cfg)) for m in range(cfg.n_pulses)]
        return np.stack(blocks)                       # (N_p, M, 2)

    for d in range(draws):
        layout = place_nodes_uniform_disk(radius, m_t, 1, (*np.atleast_1d(seed), "coh", d))
        phi = MeasurementMatrix.gaussian(base.m_compressed, base.window, (*np.atleast_1d(seed), "coh", d))
        rr = rho_rel(p1, p2, x, phi, base)
        lin = base.with_(step_schedule=tuple(linear_steps(delta_f, n_max)))
        blk = cols(lin, layout, phi)
        inner = np.sum(np.conj(blk[:, :, 1]) * blk[:, :, 0], axis=1)
        e1 = np.sum(np.abs(blk[:, :, 0]) ** 2, axis=1)
        e2 = np.sum(np.abs(blk[:, :, 1]) ** 2, axis=1)
        ci, c1, c2 = np.cumsum(inner), np.cumsum(e1), np.cumsum(e2)
        for rep in out["linear"]:
            n = rep.n_pulses
            num = abs(ci[n - 1]) ** 2 / (c1[n - 1] * c2[n - 1])
            th = coherence_lsfr(dd, delta_f, n, rr) ** 2
            rep.pairs.append(PairCoherence(0, 1, float(num), float(th), dd, 0.0))
        for rep in out["random"]:
            n = rep.n_pulses
            steps = stream((*np.atleast_1d(seed), "coh", d), "rsfr", n).uniform(0, (n - 1) * delta_f, n)
            blk = cols(base.with_(step_schedule=tuple(steps)), layout, phi)
            a, b = blk[:, :, 0].ravel(), blk[:, :, 1].ravel()
            num = abs(np.vdot(b, a)) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real)
            th = coherence_rsfr_expected(dd, delta_f, n, rr)
            rep.pairs.append(PairCoherence(0, 1, float(num), float(th), dd, 0.0))
    return out
