"""Decoupled angle-range then Doppler-range estimation.

1. Matched filter on the Nyquist-sampled first pulse over a coarse
   angle-range grid gives initial estimates.
2. Step 1 solves the Dantzig selector on the first pulse of every node over
   a finer angle-range grid built around those estimates.
3. Step 2 solves it on the whole pulse train over angle-speed-range points
   built from the step-1 angles, refined ranges and the full speed grid.

Both sparse steps can be replaced by matched filtering (``estimator="mf"``)
to obtain the baseline.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .config import RadarConfig
from .geometry import GridPoints, GridSpec, NodeLayout
from .matched_filter import mf_estimate
from .recovery import dantzig_select, detect, mu_threshold
from .sensing import MeasurementMatrix, basis_matrix, build_sensing_system, compress
from .waveform import WaveformMatrix

log = logging.getLogger("cssf.pipeline")


@dataclass(frozen=True)
class PipelineConfig:
    """Settings of the decoupled estimator.

    ``coarse_angles`` and ``coarse_ranges`` span the initial matched-filter
    grid. Step 1 subdivides each coarse cell by ``refine_angle`` and
    ``refine_range``; step 2 subdivides the step-1 range cell by
    ``refine_range2`` and searches all ``speeds``. ``halo`` is the number of
    coarse cells kept on each side of an estimate. Only the
    ``max_step1_detections`` strongest step-1 detections seed step 2.
    """

    n_nyquist_nodes: int
    coarse_angles: tuple
    coarse_ranges: tuple
    speeds: tuple
    refine_angle: int = 2
    refine_range: int = 1
    refine_range2: int = 6
    halo: int = 1
    gamma0: float = 0.3
    gamma1: float = 0.3
    gamma2: float = 0.3
    k1_cap: int = 4000
    k2_cap: int = 4000
    max_step1_detections: int = 10
    use_mfm_prefilter: bool = False
    k3: int = 200
    mu_t: float = 1.0
    sigma2: float | None = None

    def __post_init__(self):
        for name in ("coarse_angles", "coarse_ranges", "speeds"):
            v = tuple(float(a) for a in np.atleast_1d(getattr(self, name)))
            if len(v) == 0:
                raise ValueError(f"{name} must be non-empty")
            if len(v) > 1 and np.any(np.diff(v) <= 0):
                raise ValueError(f"{name} must be strictly increasing")
            object.__setattr__(self, name, v)
        if min(self.refine_angle, self.refine_range, self.refine_range2) < 1:
            raise ValueError("refine factors must be >= 1")
        if self.halo < 1:
            raise ValueError("halo must be at least one coarse cell")
        if self.n_nyquist_nodes < 1:
            raise ValueError("need at least one Nyquist node")
        for g in (self.gamma0, self.gamma1, self.gamma2):
            if not 0 < g <= 1:
                raise ValueError("thresholds must lie in (0, 1]")

    @property
    def coarse_grid(self) -> GridSpec:
        return GridSpec(self.coarse_angles, [0.0], self.coarse_ranges)

    @property
    def angle_step(self) -> float:
        a = self.coarse_angles
        return (a[1] - a[0]) if len(a) > 1 else 0.0

    @property
    def range_step(self) -> float:
        c = self.coarse_ranges
        return (c[1] - c[0]) if len(c) > 1 else 0.0

    def with_(self, **kw) -> "PipelineConfig":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        return cls(**d)


@dataclass(frozen=True)
class EstimateSet:
    """Detections of one pipeline stage.

    ``speeds`` is ``None`` for the angle-range stages. ``grid`` and
    ``scores`` keep the full search grid and its amplitude profile so that
    the detection threshold can be swept afterwards.
    """

    stage: str
    angles: np.ndarray
    ranges: np.ndarray
    amplitudes: np.ndarray
    speeds: np.ndarray | None = None
    grid: GridPoints | None = field(default=None, compare=False)
    scores: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.stage not in ("initial", "step1", "step2"):
            raise ValueError(f"unknown stage {self.stage!r}")
        if self.stage == "step2" and self.speeds is None:
            raise ValueError("step-2 estimates carry speeds")
        if self.stage != "step2" and self.speeds is not None:
            raise ValueError("angle-range estimates carry no speed")

    def __len__(self) -> int:
        return len(self.angles)

    @property
    def points(self) -> list:
        sp = [None] * len(self) if self.speeds is None else self.speeds
        return list(zip(self.angles.tolist(), [None if s is None else float(s) for s in sp],
                        self.ranges.tolist(), self.amplitudes.tolist()))

    @classmethod
    def from_scores(cls, stage, grid: GridPoints, scores, gamma, with_speed=False):
        det = detect(scores, gamma)
        idx = det.indices
        return cls(stage, grid.angles[idx], grid.ranges[idx], det.amplitudes,
                   grid.speeds[idx] if with_speed else None, grid, np.asarray(scores))


class ComplexityEstimate(NamedTuple):
    step1: int
    step2: int
    joint: int


def complexity_estimate(n_nyquist: int, n_r: int, grid_sizes, k_sizes, cfg: RadarConfig) -> ComplexityEstimate:
    """Operation counts of the two steps against joint recovery.

    ``step1 = N_a N_c (Nn L + (N_r - Nn) M) + K1^3``,
    ``step2 = K2 (Nn (L - M) + N_r N_p M) + K3^3`` and
    ``joint = (N_a N_b N_c)^3`` with ``Nn`` Nyquist nodes.
    """
    n_a, n_b, n_c = (int(v) for v in grid_sizes)
    k1, k2, k3 = (int(v) for v in k_sizes)
    L, M, n_p = cfg.l_samples, cfg.m_compressed, cfg.n_pulses
    step1 = n_a * n_c * (n_nyquist * L + (n_r - n_nyquist) * M) + k1 ** 3
    step2 = k2 * (n_nyquist * (L - M) + n_r * n_p * M) + k3 ** 3
    return ComplexityEstimate(step1, step2, (n_a * n_b * n_c) ** 3)


def pipeline_measurements(cfg: RadarConfig, n_r: int, n_nyquist: int, phis) -> dict:
    """``{(l, m): MeasurementMatrix}``: identity on pulse 0 of the first
    ``n_nyquist`` nodes, each node's own compressive matrix elsewhere."""
    eye = MeasurementMatrix.identity(cfg.window)
    return {(l, m): (eye if (m == 0 and l < n_nyquist) else phis[l])
            for l in range(n_r) for m in range(cfg.n_pulses)}


def measure_all(snapshots, measurement: dict) -> dict:
    """Apply ``measurement[(l, m)]`` to every full-rate snapshot."""
    return {k: compress(phi, snapshots[k[0], k[1]]) for k, phi in measurement.items()}


def interference_variance(cfg: RadarConfig) -> float:
    """Per-entry interference variance; identical for Nyquist and compressed rows."""
    return (cfg.noise_var + cfg.jammer.power) * cfg.sample_power


def calibrate_interference_variance(cfg: RadarConfig, layout: NodeLayout, x: WaveformMatrix,
                                    measurement: dict, seed, runs: int = 20) -> float:
    """Empirical per-entry interference variance of the measured data.

    Synthesises ``runs`` target-free pulse trains (noise and jammer only),
    applies ``measurement[(l, m)]`` and returns the mean squared modulus of
    the measured entries. Agrees with :func:`interference_variance` in
    expectation.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    from .synthesis import synthesize_snapshots

    total = 0.0
    count = 0
    for k in range(runs):
        snaps = synthesize_snapshots([], layout, x, cfg, seed=(*np.atleast_1d(seed), "calib", k))
        for v in measure_all(snaps, measurement).values():
            total += float(np.sum(np.abs(v) ** 2))
            count += v.size
    return total / count


def _axis_around(center, step, halo, factor):
    if step == 0:
        return np.array([center])
    k = np.arange(-halo * factor, halo * factor + 1)
    return np.round(center + k * step / factor, 9)


def _unique_points(a, b, c) -> GridPoints:
    arr = np.unique(np.round(np.column_stack([b, c, a]), 9), axis=0)
    # sort speed slowest, range next, angle fastest
    return GridPoints(arr[:, 2], arr[:, 0], arr[:, 1])


def _clip_ranges(r, cfg: RadarConfig):
    lo = cfg.range_origin
    hi = cfg.range_origin + (cfg.l_pad + 1) * cfg.range_bin
    return r[(r >= lo) & (r < hi - 1e-9)]


def refine_angle_range(estimates: EstimateSet, pcfg: PipelineConfig, cfg: RadarConfig) -> GridPoints:
    """Fine angle-range points within ``halo`` coarse cells of each estimate."""
    A, R = [], []
    for a0, c0 in zip(estimates.angles, estimates.ranges):
        aa = _axis_around(a0, pcfg.angle_step, pcfg.halo, pcfg.refine_angle)
        cc = _clip_ranges(_axis_around(c0, pcfg.range_step, pcfg.halo, pcfg.refine_range), cfg)
        ga, gc = np.meshgrid(aa, cc)
        A.append(ga.ravel())
        R.append(gc.ravel())
    a, c = np.concatenate(A), np.concatenate(R)
    return _unique_points(a, np.zeros_like(a), c)


def refine_speed_range(estimates: EstimateSet, pcfg: PipelineConfig, cfg: RadarConfig) -> GridPoints:
    """Angle-speed-range points from step-1 angles, refined ranges and all speeds."""
    step = pcfg.range_step / pcfg.refine_range
    speeds = np.asarray(pcfg.speeds)
    A, B, R = [], [], []
    for a0, c0 in zip(estimates.angles, estimates.ranges):
        cc = _clip_ranges(_axis_around(c0, step, pcfg.halo, pcfg.refine_range2), cfg)
        gb, gc = np.meshgrid(speeds, cc)
        A.append(np.full(gb.size, a0))
        B.append(gb.ravel())
        R.append(gc.ravel())
    return _unique_points(np.concatenate(A), np.concatenate(B), np.concatenate(R))


def mf_profile(grid, layout, x, cfg, measurement: dict, data: dict) -> np.ndarray:
    """Matched-filter profile accumulated block by block.

    Equivalent to :func:`~cssf.matched_filter.mf_estimate` on the stacked
    system but never holds more than one ``(rows x N)`` block in memory.
    """
    corr = 0
    energy = 0
    for (l, m), r in data.items():
        blk = measurement[(l, m)].apply(basis_matrix(grid, l, m, layout, x, cfg))
        corr = corr + blk.conj().T @ r
        energy = energy + np.sum(np.abs(blk) ** 2, axis=0)
    out = np.zeros(len(grid))
    nz = energy > 0
    out[nz] = np.abs(corr[nz]) / energy[nz]
    return out


def _strongest(est: EstimateSet, k: int) -> EstimateSet:
    if len(est) <= k:
        return est
    keep = np.sort(np.argsort(-est.amplitudes, kind="stable")[:k])
    return EstimateSet(est.stage, est.angles[keep], est.ranges[keep], est.amplitudes[keep],
                       None if est.speeds is None else est.speeds[keep], est.grid, est.scores)


def _solve(system, r, pcfg: PipelineConfig, cfg: RadarConfig, estimator: str):
    if estimator == "mf":
        return mf_estimate(system, r)
    sigma2 = interference_variance(cfg) if pcfg.sigma2 is None else pcfg.sigma2
    mu = mu_threshold(system, sigma2, pcfg.mu_t)
    return np.abs(dantzig_select(system, r, mu).coefficients)


def mfm_initial(nyquist_pulses, coarse_grid, layout: NodeLayout, x: WaveformMatrix,
                cfg: RadarConfig, gamma0: float) -> EstimateSet:
    """Matched-filter angle-range estimates from Nyquist-sampled first pulses.

    ``nyquist_pulses`` is a list of :class:`~cssf.synthesis.PulseSnapshot`
    (one per Nyquist node, pulse 0). The coarse grid's speed axis is ignored.
    """
    if len(nyquist_pulses) == 0:
        raise ValueError("need at least one Nyquist node")
    grid = coarse_grid if isinstance(coarse_grid, GridSpec) else GridSpec(*coarse_grid)
    grid = GridSpec(grid.angles, [0.0], grid.ranges)
    nodes = [p.node for p in nyquist_pulses]
    eye = MeasurementMatrix.identity(cfg.window)
    system = build_sensing_system(grid, layout, x, cfg, {(l, 0): eye for l in nodes},
                                  pulse_selector=[0], nodes=nodes)
    r = system.stack({(p.node, 0): p.samples for p in nyquist_pulses})
    profile = mf_estimate(system, r)
    if not np.any(profile > 0):
        log.warning("matched filter found nothing; falling back to the full coarse grid")
        pts = system.points
        return EstimateSet("initial", np.zeros(0), np.zeros(0), np.zeros(0), None, pts, profile)
    return EstimateSet.from_scores("initial", system.points, profile, gamma0)


def step1_angle_range(pulse1_data: dict, initial: EstimateSet, pcfg: PipelineConfig,
                      layout: NodeLayout, x: WaveformMatrix, cfg: RadarConfig,
                      measurement: dict, estimator: str = "cs") -> EstimateSet:
    """Angle-range recovery from the first pulse of every node.

    ``pulse1_data`` maps ``(l, 0)`` to that node's measurement vector.
    An empty ``initial`` set falls back to the full coarse grid.
    """
    if len(initial) == 0:
        full = pcfg.coarse_grid.points()
        initial = EstimateSet("initial", full.angles, full.ranges, np.ones(len(full)))
    grid = refine_angle_range(initial, pcfg, cfg)
    if len(grid) > pcfg.k1_cap:
        raise ValueError(f"step-1 grid has {len(grid)} points, above k1_cap={pcfg.k1_cap}")
    nodes = sorted({l for l, _ in pulse1_data})
    system = build_sensing_system(grid, layout, x, cfg, measurement, pulse_selector=[0], nodes=nodes)
    r = system.stack(pulse1_data)
    scores = _solve(system, r, pcfg, cfg, estimator)
    return EstimateSet.from_scores("step1", grid, scores, pcfg.gamma1)


def step2_doppler_range(full_train: dict, step1: EstimateSet, pcfg: PipelineConfig,
                        layout: NodeLayout, x: WaveformMatrix, cfg: RadarConfig,
                        measurement: dict, use_mfm_prefilter: bool | None = None,
                        estimator: str = "cs") -> EstimateSet:
    """Angle-speed-range recovery on the whole pulse train."""
    if len(step1) == 0:
        raise ValueError("step 1 produced no detections")
    prefilter = pcfg.use_mfm_prefilter if use_mfm_prefilter is None else use_mfm_prefilter
    grid = refine_speed_range(_strongest(step1, pcfg.max_step1_detections), pcfg, cfg)
    if len(grid) > pcfg.k2_cap:
        raise ValueError(f"step-2 grid has {len(grid)} points, above k2_cap={pcfg.k2_cap}")
    if estimator == "mf":
        scores = mf_profile(grid, layout, x, cfg, measurement, full_train)
        return EstimateSet.from_scores("step2", grid, scores, pcfg.gamma2, with_speed=True)
    nodes = sorted({l for l, _ in full_train})
    pulses = sorted({m for _, m in full_train})
    system = build_sensing_system(grid, layout, x, cfg, measurement,
                                  pulse_selector=pulses, nodes=nodes)
    r = system.stack(full_train)
    if prefilter and estimator == "cs" and len(grid) > pcfg.k3:
        keep = np.sort(np.argsort(-mf_estimate(system, r), kind="stable")[:pcfg.k3])
        sub = build_sensing_system(grid.subset(keep), layout, x, cfg, measurement,
                                   pulse_selector=pulses, nodes=nodes)
        scores = np.zeros(len(grid))
        scores[keep] = _solve(sub, r, pcfg, cfg, estimator)
    else:
        scores = _solve(system, r, pcfg, cfg, estimator)
    return EstimateSet.from_scores("step2", grid, scores, pcfg.gamma2, with_speed=True)


def run_pipeline(snapshots, layout: NodeLayout, x: WaveformMatrix, cfg: RadarConfig,
                 pcfg: PipelineConfig, phis, estimator: str = "cs") -> dict:
    """Run all three stages on full-rate ``snapshots`` ``(N_r, N_p, W)``.

    ``phis`` holds one compressive matrix per node. With ``estimator="mf"``
    every stage uses the matched filter on Nyquist data from all nodes.
    """
    n_r = layout.n_r
    if estimator == "mf":
        eye = MeasurementMatrix.identity(cfg.window)
        measurement = {(l, m): eye for l in range(n_r) for m in range(cfg.n_pulses)}
        nyq = range(n_r)
    else:
        measurement = pipeline_measurements(cfg, n_r, pcfg.n_nyquist_nodes, phis)
        nyq = range(pcfg.n_nyquist_nodes)
    from .synthesis import PulseSnapshot

    initial = mfm_initial([PulseSnapshot(l, 0, snapshots[l, 0]) for l in nyq],
                          pcfg.coarse_grid, layout, x, cfg, pcfg.gamma0)
    data = measure_all(snapshots, measurement)
    pulse1 = {k: v for k, v in data.items() if k[1] == 0}
    s1 = step1_angle_range(pulse1, initial, pcfg, layout, x, cfg, measurement, estimator)
    s2 = step2_doppler_range(data, s1, pcfg, layout, x, cfg, measurement, estimator=estimator)
    return {"initial": initial, "step1": s1, "step2": s2}
