"""Antenna layouts, targets and the flattened angle-speed-range grid.

Angles are radians, speeds radial m/s, ranges meters. A positive speed
shortens the target range over slow time.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rng import stream


@dataclass(frozen=True)
class NodeLayout:
    """Polar positions ``(r, alpha)`` of the transmit and receive nodes."""

    tx: np.ndarray  # shape (M_t, 2)
    rx: np.ndarray  # shape (N_r, 2)
    radius: float = np.inf

    def __post_init__(self):
        tx = np.atleast_2d(np.asarray(self.tx, dtype=float))
        rx = np.atleast_2d(np.asarray(self.rx, dtype=float))
        if tx.shape[1] != 2 or rx.shape[1] != 2:
            raise ValueError("node positions must be (r, alpha) pairs")
        if tx.shape[0] < 1 or rx.shape[0] < 1:
            raise ValueError("need at least one transmit and one receive node")
        for name, arr in (("tx", tx), ("rx", rx)):
            if np.any(arr[:, 0] < 0) or np.any(arr[:, 0] > self.radius):
                raise ValueError(f"{name} node radius outside [0, {self.radius}]")
        tx.setflags(write=False)
        rx.setflags(write=False)
        object.__setattr__(self, "tx", tx)
        object.__setattr__(self, "rx", rx)

    @property
    def m_t(self) -> int:
        return self.tx.shape[0]

    @property
    def n_r(self) -> int:
        return self.rx.shape[0]

    @property
    def max_radius(self) -> float:
        return float(max(self.tx[:, 0].max(), self.rx[:, 0].max()))

    def eta_tx(self, theta) -> np.ndarray:
        """Projections of every transmit node on direction(s) ``theta``.

        Returns an array of shape ``(M_t,) + np.shape(theta)``.
        """
        theta = np.asarray(theta, dtype=float)
        r, a = self.tx[:, 0], self.tx[:, 1]
        return _project(r, a, theta)

    def eta_rx(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        r, a = self.rx[:, 0], self.rx[:, 1]
        return _project(r, a, theta)

    def to_dict(self) -> dict:
        return {"tx": self.tx.tolist(), "rx": self.rx.tolist(),
                "radius": None if np.isinf(self.radius) else self.radius}

    @classmethod
    def from_dict(cls, d: dict) -> "NodeLayout":
        radius = d.get("radius")
        return cls(np.asarray(d["tx"]), np.asarray(d["rx"]),
                   np.inf if radius is None else float(radius))


def _project(r, a, theta):
    shape = (r.size,) + theta.shape
    return (r.reshape((-1,) + (1,) * theta.ndim)
            * np.cos(theta[None, ...] - a.reshape((-1,) + (1,) * theta.ndim))).reshape(shape)


def eta(node, theta):
    """Far-field projection ``r cos(theta - alpha)`` of a node at ``(r, alpha)``."""
    r, alpha = node
    return r * np.cos(np.asarray(theta) - alpha)


def place_nodes_uniform_disk(radius: float, m_t: int, n_r: int, seed) -> NodeLayout:
    """Draw ``m_t`` transmit and ``n_r`` receive nodes uniformly over a disk.

    The radial coordinate is ``radius * sqrt(u)`` so that positions are
    uniform in area. Deterministic for a given ``seed``.
    """
    if m_t < 1 or n_r < 1:
        raise ValueError("node counts must be >= 1")
    if radius < 0:
        raise ValueError("radius must be non-negative")
    rng = stream(seed, "layout")
    u = rng.random((m_t + n_r, 2))
    r = radius * np.sqrt(u[:, 0])
    alpha = 2 * np.pi * u[:, 1]
    pos = np.column_stack([r, alpha])
    return NodeLayout(pos[:m_t], pos[m_t:], radius=radius)


@dataclass(frozen=True)
class Target:
    angle: float
    range0: float
    speed: float = 0.0
    reflectivity: complex = 1.0 + 0.0j

    def __post_init__(self):
        if not self.range0 > 0:
            raise ValueError("target range must be positive")

    def check_far_field(self, layout: NodeLayout, factor: float = 100.0) -> None:
        if self.range0 < factor * layout.max_radius:
            raise ValueError(
                f"target at {self.range0} m violates far field "
                f"(needs >= {factor} x {layout.max_radius:.2f} m)")


@dataclass(frozen=True)
class GridPoints:
    """An explicit, ordered list of grid points (one column each)."""

    angles: np.ndarray
    speeds: np.ndarray
    ranges: np.ndarray

    def __post_init__(self):
        a, b, c = (np.atleast_1d(np.asarray(v, dtype=float))
                   for v in (self.angles, self.speeds, self.ranges))
        a, b, c = np.broadcast_arrays(a, b, c)
        for name, v in zip(("angles", "speeds", "ranges"), (a, b, c)):
            v = np.array(v)
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    def __len__(self) -> int:
        return self.angles.size

    def subset(self, idx) -> "GridPoints":
        idx = np.asarray(idx, dtype=int)
        return GridPoints(self.angles[idx], self.speeds[idx], self.ranges[idx])

    def index_of(self, angle, speed, range0, atol=1e-9) -> int:
        hit = np.flatnonzero((np.abs(self.angles - angle) <= atol)
                             & (np.abs(self.speeds - speed) <= atol)
                             & (np.abs(self.ranges - range0) <= atol))
        return int(hit[0]) if hit.size else -1


@dataclass(frozen=True)
class GridSpec:
    """Tensor grid over angle, speed and range axes.

    Points are flattened angle-fastest, then range, then speed.
    """

    angles: np.ndarray
    speeds: np.ndarray
    ranges: np.ndarray
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        for name in ("angles", "speeds", "ranges"):
            v = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            if v.ndim != 1 or v.size == 0:
                raise ValueError(f"{name} axis must be a non-empty 1-D sequence")
            if v.size > 1 and np.any(np.diff(v) <= 0):
                raise ValueError(f"{name} axis must be strictly increasing")
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.angles.size, self.speeds.size, self.ranges.size

    @property
    def size(self) -> int:
        n_a, n_b, n_c = self.shape
        return n_a * n_b * n_c

    def points(self) -> GridPoints:
        if "points" not in self._cache:
            # speed slowest, range next, angle fastest
            b, c, a = np.meshgrid(self.speeds, self.ranges, self.angles, indexing="ij")
            self._cache["points"] = GridPoints(a.ravel(), b.ravel(), c.ravel())
        return self._cache["points"]

    def to_dict(self) -> dict:
        return {"angles": self.angles.tolist(), "speeds": self.speeds.tolist(),
                "ranges": self.ranges.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "GridSpec":
        return cls(d["angles"], d["speeds"], d["ranges"])


def grid_index(n_a: int, n_b: int, n_c: int, grid: GridSpec) -> int:
    """1-based flat index of the 1-based axis indices ``(n_a, n_b, n_c)``."""
    N_a, N_b, N_c = grid.shape
    if not (1 <= n_a <= N_a and 1 <= n_b <= N_b and 1 <= n_c <= N_c):
        raise ValueError(f"index ({n_a}, {n_b}, {n_c}) outside grid {grid.shape}")
    return (n_b - 1) * N_a * N_c + (n_c - 1) * N_a + n_a


def grid_coords(n: int, grid: GridSpec) -> tuple[int, int, int]:
    """Inverse of :func:`grid_index`."""
    N_a, N_b, N_c = grid.shape
    if not 1 <= n <= grid.size:
        raise ValueError(f"flat index {n} outside [1, {grid.size}]")
    k = n - 1
    n_b, rem = divmod(k, N_a * N_c)
    n_c, n_a = divmod(rem, N_a)
    return n_a + 1, n_b + 1, n_c + 1


def uniform_axis(start: float, step: float, count: int) -> np.ndarray:
    """``count`` points ``start + k*step``; rounded to suppress float drift."""
    return np.round(start + step * np.arange(count), 12)
