"""Full-rate baseband returns for each receive node and pulse.

Node and pulse indices are 0-based; pulse ``m`` therefore accrues
``m * T`` of slow time.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import C, RadarConfig
from .errors import TargetOutOfWindow
from .geometry import NodeLayout, Target
from .rng import stream
from .waveform import WaveformMatrix

# guards floor() against 2d/(c Ts) landing a few ulps under an integer
_FLOOR_GUARD = 1e-9


@dataclass(frozen=True)
class PulseSnapshot:
    node: int
    pulse: int
    samples: np.ndarray


def delay_bin(range0: float, ts: float, l_pad: int | None = None,
              origin: float = 0.0) -> int:
    """Integer round-trip delay ``floor(2 (d - origin) / (c Ts))``.

    Raises :class:`TargetOutOfWindow` when ``l_pad`` is given and the delay
    lies outside ``[0, l_pad]``.
    """
    tau = int(np.floor(2.0 * (range0 - origin) / (C * ts) + _FLOOR_GUARD))
    if l_pad is not None and not 0 <= tau <= l_pad:
        raise TargetOutOfWindow(
            f"range {range0} m maps to delay bin {tau}, window holds 0..{l_pad}")
    return tau


def delay_bins(ranges, cfg: RadarConfig) -> np.ndarray:
    """Vectorised :func:`delay_bin` with window check."""
    ranges = np.asarray(ranges, dtype=float)
    tau = np.floor(2.0 * (ranges - cfg.range_origin) / (C * cfg.ts) + _FLOOR_GUARD).astype(int)
    bad = (tau < 0) | (tau > cfg.l_pad)
    if np.any(bad):
        raise TargetOutOfWindow(
            f"ranges {ranges[bad][:3]} fall outside the window (0..{cfg.l_pad} bins)")
    return tau


def doppler_shift(speed: float, f_m: float) -> float:
    return 2.0 * speed * f_m / C


def intra_pulse_phase_drift(speed: float, cfg: RadarConfig) -> float:
    """Largest Doppler phase (rad) accumulated across one sampling window."""
    f_max = float(np.max(cfg.carriers))
    return 2 * np.pi * f_max * 2 * cfg.ts * (cfg.window - 1) * abs(speed) / C


def _target_return(t: Target, layout, x, cfg, l, m):
    f_m = cfg.carriers[m]
    f_d = doppler_shift(t.speed, f_m)
    tau = delay_bin(t.range0, cfg.ts, cfg.l_pad, cfg.range_origin)
    eta_r = layout.eta_rx(t.angle)[l]
    phase = (-2 * t.range0 * f_m + eta_r * f_m) / C + f_d * m * cfg.pri
    phase = np.mod(phase, 1.0)  # reduce before scaling by 2 pi
    steer = np.exp(2j * np.pi * f_m * layout.eta_tx(t.angle) / C)
    y = np.zeros(cfg.window, dtype=complex)
    y[tau:tau + cfg.l_samples] = x.samples @ steer
    y *= np.exp(2j * np.pi * f_d * np.arange(cfg.window) * cfg.ts)
    return t.reflectivity * np.exp(2j * np.pi * phase) * y


def synthesize_interference(cfg: RadarConfig, layout: NodeLayout, l: int, m: int,
                            seed) -> np.ndarray:
    """Thermal noise plus the barrage jammer seen by node ``l`` on pulse ``m``.

    Thermal noise is independent per node; the jammer waveform is drawn once
    per pulse (key ``(seed, m)``) and reaches every node with its far-field
    phase, so it is coherent across the array.
    """
    W = cfg.window
    out = np.zeros(W, dtype=complex)
    p = cfg.sample_power
    if cfg.noise_var > 0:
        g = stream(seed, "thermal", l, m)
        out += np.sqrt(cfg.noise_var * p / 2) * (g.standard_normal(W) + 1j * g.standard_normal(W))
    if cfg.jammer.power > 0:
        g = stream(seed, "jammer", m)
        w = np.sqrt(cfg.jammer.power * p / 2) * (g.standard_normal(W) + 1j * g.standard_normal(W))
        f_m = cfg.carriers[m]
        out += w * np.exp(2j * np.pi * f_m * layout.eta_rx(cfg.jammer.angle)[l] / C)
    return out


def synthesize_pulse(targets, layout: NodeLayout, x: WaveformMatrix, cfg: RadarConfig,
                     l: int, m: int, seed=None) -> PulseSnapshot:
    """Nyquist-rate samples of node ``l`` during pulse ``m``.

    ``seed=None`` gives the noise-free signal.
    """
    y = np.zeros(cfg.window, dtype=complex)
    for t in targets:
        y += _target_return(t, layout, x, cfg, l, m)
    if seed is not None:
        y += synthesize_interference(cfg, layout, l, m, seed)
    return PulseSnapshot(l, m, y)


def synthesize_snapshots(targets, layout, x, cfg, seed=None, nodes=None,
                         pulses=None) -> np.ndarray:
    """Array ``(n_nodes, n_pulses, L + L~)`` of :func:`synthesize_pulse` outputs."""
    nodes = range(layout.n_r) if nodes is None else list(nodes)
    pulses = range(cfg.n_pulses) if pulses is None else list(pulses)
    out = np.empty((len(nodes), len(pulses), cfg.window), dtype=complex)
    for a, l in enumerate(nodes):
        for b, m in enumerate(pulses):
            out[a, b] = synthesize_pulse(targets, layout, x, cfg, l, m, seed).samples
    return out
