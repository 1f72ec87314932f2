"""Measurement matrices, basis columns and the stacked sensing matrix."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .config import C, RadarConfig
from .geometry import GridPoints, GridSpec, NodeLayout
from .rng import stream
from .synthesis import PulseSnapshot, delay_bins, synthesize_snapshots
from .waveform import WaveformMatrix


@dataclass(frozen=True)
class MeasurementMatrix:
    """``M x (L + L~)`` projection applied to one node's pulse samples."""

    entries: np.ndarray
    mode: str = "gaussian"

    def __post_init__(self):
        if self.mode not in ("gaussian", "identity"):
            raise ValueError(f"unknown measurement mode {self.mode!r}")
        e = np.atleast_2d(np.asarray(self.entries))
        if e.ndim != 2:
            raise ValueError("measurement matrix must be 2-D")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def gaussian(cls, m: int, window: int, seed, complex_entries: bool = False):
        """I.i.d. Gaussian entries of variance ``1 / window``."""
        g = stream(seed, "phi")
        if complex_entries:
            e = (g.standard_normal((m, window)) + 1j * g.standard_normal((m, window))) / np.sqrt(2 * window)
        else:
            e = g.standard_normal((m, window)) / np.sqrt(window)
        return cls(e, "gaussian")

    @classmethod
    def identity(cls, window: int):
        return cls(np.eye(window), "identity")

    def apply(self, y: np.ndarray) -> np.ndarray:
        if self.mode == "identity":
            if y.shape[0] != self.entries.shape[1]:
                raise ValueError(f"expected {self.entries.shape[1]} rows, got {y.shape[0]}")
            return np.array(y, dtype=complex)
        if y.shape[0] != self.entries.shape[1]:
            raise ValueError(f"expected {self.entries.shape[1]} rows, got {y.shape[0]}")
        return self.entries @ y


def compress(phi: MeasurementMatrix, snapshot) -> np.ndarray:
    """Project one Nyquist snapshot (or raw sample vector) through ``phi``."""
    y = snapshot.samples if isinstance(snapshot, PulseSnapshot) else np.asarray(snapshot)
    if y.ndim != 1:
        raise ValueError("snapshot must be a vector")
    return phi.apply(y)


def _as_points(grid) -> GridPoints:
    return grid.points() if isinstance(grid, GridSpec) else grid


def basis_matrix(grid, l: int, m: int, layout: NodeLayout, x: WaveformMatrix,
                 cfg: RadarConfig) -> np.ndarray:
    """Noise-free Nyquist responses of every grid point, ``(L + L~) x N``.

    Column ``n`` is ``exp(j2pi q) D(2 b f_m / c) C_tau X v_m(a)`` for grid
    point ``(a, b, c) = (angle, speed, range)``.
    """
    pts = _as_points(grid)
    f_m = cfg.carriers[m]
    W, L = cfg.window, cfg.l_samples
    tau = delay_bins(pts.ranges, cfg)
    f_d = 2 * pts.speeds * f_m / C
    q = (-2 * pts.ranges * f_m + layout.eta_rx(pts.angles)[l] * f_m) / C + f_d * m * cfg.pri
    q = np.mod(q, 1.0)  # keep the fast-time phase ramp from losing precision
    steer = np.exp(2j * np.pi * f_m * layout.eta_tx(pts.angles) / C)   # (M_t, N)
    xv = x.samples @ steer                                                 # (L, N)
    n = len(pts)
    out = np.zeros((W, n), dtype=complex)
    rows = tau[None, :] + np.arange(L)[:, None]
    out[rows, np.arange(n)[None, :]] = xv
    t = np.arange(W)[:, None] * cfg.ts
    out *= np.exp(2j * np.pi * (f_d[None, :] * t + q[None, :]))
    return out


def basis_column(point, l, m, layout, x, cfg) -> np.ndarray:
    """Single column of :func:`basis_matrix` for ``point = (angle, speed, range)``."""
    a, b, c = point
    return basis_matrix(GridPoints(a, b, c), l, m, layout, x, cfg)[:, 0]


@dataclass(frozen=True)
class SensingSystem:
    """Per-(node, pulse) sensing blocks and their row-stacked concatenation.

    Blocks are ordered node-major: ``(0, 0..N_p-1), (1, 0..N_p-1), ...``.
    """

    points: GridPoints
    order: tuple
    blocks: dict
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def n_columns(self) -> int:
        return len(self.points)

    @property
    def stacked(self) -> np.ndarray:
        if "stacked" not in self._cache:
            self._cache["stacked"] = np.vstack([self.blocks[k] for k in self.order])
        return self._cache["stacked"]

    @property
    def column_norms(self) -> np.ndarray:
        if "norms" not in self._cache:
            self._cache["norms"] = np.linalg.norm(self.stacked, axis=0)
        return self._cache["norms"]

    @property
    def sigma_max(self) -> float:
        return float(self.column_norms.max())

    def row_slices(self) -> dict:
        out, start = {}, 0
        for k in self.order:
            n = self.blocks[k].shape[0]
            out[k] = slice(start, start + n)
            start += n
        return out

    def stack(self, measurements: Mapping) -> np.ndarray:
        """Concatenate ``{(l, m): vector}`` in block order."""
        parts = []
        for k in self.order:
            v = np.asarray(measurements[k])
            if v.shape != (self.blocks[k].shape[0],):
                raise ValueError(f"measurement {k} has shape {v.shape}, "
                                 f"expected ({self.blocks[k].shape[0]},)")
            parts.append(v)
        return np.concatenate(parts)


def _resolve_phi(measurement, l, m) -> MeasurementMatrix:
    if isinstance(measurement, Mapping):
        return measurement[(l, m)]
    return measurement[l]


def build_sensing_system(grid, layout: NodeLayout, x: WaveformMatrix, cfg: RadarConfig,
                         measurement, pulse_selector: Sequence[int] | None = None,
                         nodes: Sequence[int] | None = None) -> SensingSystem:
    """Assemble ``Phi_l Psi_lm`` for every selected node and pulse.

    ``measurement`` is either one :class:`MeasurementMatrix` per node or a
    mapping ``{(l, m): MeasurementMatrix}`` when the projection changes
    between pulses.
    """
    pts = _as_points(grid)
    if len(pts) == 0:
        raise ValueError("grid is empty")
    if x.length != cfg.l_samples:
        raise ValueError(f"waveform length {x.length} != L = {cfg.l_samples}")
    if x.m_t != layout.m_t:
        raise ValueError(f"waveform has {x.m_t} columns but layout has {layout.m_t} tx nodes")
    nodes = range(layout.n_r) if nodes is None else nodes
    pulses = range(cfg.n_pulses) if pulse_selector is None else pulse_selector
    if not isinstance(measurement, Mapping) and len(measurement) != layout.n_r:
        raise ValueError(f"need one measurement matrix per rx node ({layout.n_r}), "
                         f"got {len(measurement)}")
    order, blocks = [], {}
    for l in nodes:
        for m in pulses:
            phi = _resolve_phi(measurement, l, m)
            if phi.shape[1] != cfg.window:
                raise ValueError(f"measurement for node {l} has {phi.shape[1]} columns, "
                                 f"expected {cfg.window}")
            blocks[(l, m)] = phi.apply(basis_matrix(pts, l, m, layout, x, cfg))
            order.append((l, m))
    return SensingSystem(pts, tuple(order), blocks)


def measure(system: SensingSystem, snapshots: np.ndarray, measurement) -> np.ndarray:
    """Compress full-rate snapshots ``(n_nodes, n_pulses, W)`` into the stacked vector.

    ``snapshots`` is indexed by absolute node and pulse index.
    """
    parts = {}
    for l, m in system.order:
        parts[(l, m)] = compress(_resolve_phi(measurement, l, m), snapshots[l, m])
    return system.stack(parts)


def gaussian_measurements(cfg: RadarConfig, n_nodes: int, seed,
                          complex_entries: bool = False) -> list:
    """One independent Gaussian measurement matrix per node."""
    return [MeasurementMatrix.gaussian(cfg.m_compressed, cfg.window, (*np.atleast_1d(seed), "node", l),
                                       complex_entries)
            for l in range(n_nodes)]


def scene_measurements(targets, layout, x, cfg, system: SensingSystem, measurement,
                       seed=None) -> np.ndarray:
    """Synthesize the scene and return the stacked measurement vector."""
    snaps = synthesize_snapshots(targets, layout, x, cfg, seed)
    return measure(system, snaps, measurement)
