"""Transmit waveform matrix (fast time x transmit node)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import hadamard


@dataclass(frozen=True)
class WaveformMatrix:
    """``L x M_t`` complex samples; every column has unit squared norm."""

    samples: np.ndarray

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.samples, dtype=complex))
        if x.ndim != 2:
            raise ValueError("waveform matrix must be 2-D")
        norms = np.sum(np.abs(x) ** 2, axis=0)
        if not np.allclose(norms, 1.0, rtol=0, atol=1e-10):
            raise ValueError("waveform columns must have unit squared norm")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)

    @property
    def length(self) -> int:
        return self.samples.shape[0]

    @property
    def m_t(self) -> int:
        return self.samples.shape[1]

    def to_csv(self, path) -> None:
        """Dump as CSV with one row per fast-time sample (real, imag pairs)."""
        x = self.samples
        header = ",".join(f"re{i},im{i}" for i in range(x.shape[1]))
        out = np.empty((x.shape[0], 2 * x.shape[1]))
        out[:, 0::2] = x.real
        out[:, 1::2] = x.imag
        np.savetxt(path, out, delimiter=",", header=header, comments="", fmt="%.17g")


def hadamard_waveforms(l_samples: int, m_t: int) -> WaveformMatrix:
    """First ``m_t`` rows of the Sylvester Hadamard matrix of order ``l_samples``,
    scaled by ``1/sqrt(L)`` and laid out as columns."""
    if l_samples < 1 or l_samples & (l_samples - 1):
        raise ValueError(f"Hadamard length must be a power of two, got {l_samples}")
    if not 1 <= m_t <= l_samples:
        raise ValueError(f"need 1 <= m_t <= {l_samples}, got {m_t}")
    h = hadamard(l_samples)[:m_t].T / np.sqrt(l_samples)
    return WaveformMatrix(h.astype(complex))


def cross_correlation(x: WaveformMatrix, i: int, i2: int, lag: int) -> complex:
    """``sum_t x_i(t) conj(x_i2(t + lag))`` with zeros outside ``[0, L-1]``."""
    L = x.length
    if abs(lag) >= L:
        return 0j
    a = x.samples[:, i]
    b = x.samples[:, i2]
    if lag >= 0:
        return complex(np.dot(a[:L - lag], np.conj(b[lag:])))
    return complex(np.dot(a[-lag:], np.conj(b[:L + lag])))
