"""Matched-filter baseline and the step-frequency MIMO ambiguity function."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .config import C, RadarConfig
from .geometry import NodeLayout
from .waveform import WaveformMatrix


@dataclass(frozen=True)
class AmbiguitySample:
    delta_d: float
    delta_v: float
    theta: float
    theta2: float
    value: complex


def lag_samples(delta_d: float, ts: float) -> int:
    """Range offset rounded to the nearest whole sample shift."""
    return int(np.round(2 * delta_d / (C * ts)))


def _lagged_products(x: WaveformMatrix, lag: int) -> np.ndarray:
    """``(L, M_t, M_t)`` array of ``x_i(t) conj(x_i2(t + lag))`` (zero padded)."""
    L = x.length
    a = x.samples
    b = np.zeros_like(a)
    if lag >= 0:
        b[:L - lag] = a[lag:] if lag < L else 0
    else:
        b[-lag:] = a[:L + lag] if -lag < L else 0
    return a[:, :, None] * np.conj(b)[:, None, :]


def af_partial(x: WaveformMatrix, i: int, i2: int, m: int, delta_d: float,
               delta_v: float, cfg: RadarConfig) -> complex:
    """Per-pulse cross ambiguity of waveforms ``i`` and ``i2``.

    ``sum_t x_i(t) conj(x_i2(t + lag)) exp(j2pi f_m (2 dv / c) t Ts)`` with
    ``lag = round(2 dd / (c Ts))``.
    """
    lag = lag_samples(delta_d, cfg.ts)
    prod = _lagged_products(x, lag)[:, i, i2]
    f_m = cfg.carriers[m]
    t = np.arange(x.length) * cfg.ts
    return complex(np.sum(prod * np.exp(2j * np.pi * f_m * 2 * delta_v / C * t)))


def _af_terms(delta_d, delta_v, theta, theta2, layout, x, cfg):
    """Per-(m, i, i2) summands of the ambiguity function, summed over nodes."""
    lag = lag_samples(delta_d, cfg.ts)
    prod = _lagged_products(x, lag)                              # (L, Mt, Mt)
    f = cfg.carriers                                             # (Np,)
    t = np.arange(x.length) * cfg.ts
    dop = np.exp(2j * np.pi * f[:, None] * 2 * delta_v / C * t[None, :])   # (Np, L)
    chi = np.einsum("mt,tij->mij", dop, prod)                   # (Np, Mt, Mt)
    et, et2 = layout.eta_tx(theta), layout.eta_tx(theta2)
    er = layout.eta_rx(theta) - layout.eta_rx(theta2)            # (Nr,)
    tx_phase = et[:, None] - et2[None, :]                        # (Mt, Mt)
    rx_sum = np.sum(np.exp(2j * np.pi * f[:, None] * er[None, :] / C), axis=1)  # (Np,)
    ph = np.exp(2j * np.pi * f[:, None, None] * (tx_phase[None] - 2 * delta_d) / C)
    return chi * ph * rx_sum[:, None, None]


def ambiguity(delta_d: float, delta_v: float, theta: float, theta2: float,
              layout: NodeLayout, x: WaveformMatrix, cfg: RadarConfig) -> complex:
    """Step-frequency MIMO ambiguity function.

    Sums ``af_partial`` over receive nodes, transmit pairs and pulses, each
    weighted by the carrier-dependent array and range phase.
    """
    return complex(np.sum(_af_terms(delta_d, delta_v, theta, theta2, layout, x, cfg)))


def af_range_factors(delta_d: float, theta: float, layout: NodeLayout, x: WaveformMatrix,
                     cfg: RadarConfig) -> tuple[complex, complex, complex]:
    """Zero-Doppler, matched-angle decomposition ``(chi1, chi2, dchi)``.

    ``chi1`` is the step-frequency range kernel ``sum_m exp(-j4pi f_m dd / c)``,
    ``chi2`` the summed waveform autocorrelation at the range lag, and
    ``dchi`` the cross-waveform remainder, so that
    ``ambiguity(dd, 0, theta, theta) == N_r * (chi1 * chi2 + dchi)``.
    """
    lag = lag_samples(delta_d, cfg.ts)
    prod = _lagged_products(x, lag).sum(axis=0)                  # (Mt, Mt)
    f = cfg.carriers
    chi1 = complex(np.sum(np.exp(-4j * np.pi * f * delta_d / C)))
    chi2 = complex(np.trace(prod))
    et = layout.eta_tx(theta)
    off = ~np.eye(x.m_t, dtype=bool)
    ph = np.exp(2j * np.pi * f[:, None, None] * ((et[:, None] - et[None, :])[None] - 2 * delta_d) / C)
    dchi = complex(np.sum((ph * prod[None])[:, off]))
    return chi1, chi2, dchi


def ambiguity_surface(delta_ds, delta_vs, theta, theta2, layout, x, cfg) -> list[AmbiguitySample]:
    return [AmbiguitySample(float(dd), float(dv), float(theta), float(theta2),
                            ambiguity(dd, dv, theta, theta2, layout, x, cfg))
            for dv in np.atleast_1d(delta_vs) for dd in np.atleast_1d(delta_ds)]


def write_af_csv(path, samples) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["delta_d", "delta_v", "theta", "theta2", "re", "im", "abs"])
        for s in samples:
            w.writerow([repr(s.delta_d), repr(s.delta_v), repr(s.theta), repr(s.theta2),
                        repr(s.value.real), repr(s.value.imag), repr(abs(s.value))])


def mf_estimate(sensing, r) -> np.ndarray:
    """Matched-filter profile ``|p_n^H r| / ||p_n||^2`` over all grid points."""
    theta = sensing.stacked if hasattr(sensing, "stacked") else np.asarray(sensing)
    r = np.asarray(r)
    if r.shape != (theta.shape[0],):
        raise ValueError(f"r has shape {r.shape}, expected ({theta.shape[0]},)")
    energy = np.sum(np.abs(theta) ** 2, axis=0)
    corr = np.abs(theta.conj().T @ r)
    out = np.zeros(theta.shape[1])
    nz = energy > 0
    out[nz] = corr[nz] / energy[nz]
    return out


def write_profile_csv(path, coords, profile, name="value") -> None:
    """Write a profile next to its grid coordinates (angle, speed, range)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["angle", "speed", "range", name])
        for (a, b, c), v in zip(coords, profile):
            w.writerow([repr(float(a)), repr(float(b)), repr(float(c)), repr(float(v))])
