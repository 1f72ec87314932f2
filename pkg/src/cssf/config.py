"""System constants and the radar configuration record."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .rng import stream

#: propagation speed used everywhere (m/s)
C = 3e8


@dataclass(frozen=True)
class JammerSpec:
    angle: float = np.deg2rad(7.0)
    power: float = 0.0


@dataclass(frozen=True)
class RadarConfig:
    """Physical and system constants of one CSSF MIMO radar run.

    Interference powers (``noise_var``, ``jammer.power``) are relative to the
    per-sample power of one unit-power transmit waveform. With unit-norm
    waveform columns that per-sample power is ``1/L``, so the thermal noise
    actually added to each sample has variance ``noise_var / L`` and
    ``SNR = 1 / noise_var``.
    """

    f: float = 5e9
    step_schedule: tuple = (0.0,)
    pri: float = 250e-6
    ts: float = 100e-9
    l_samples: int = 512
    l_pad: int = 153
    m_compressed: int = 10
    noise_var: float = 1.0
    jammer: JammerSpec = field(default_factory=JammerSpec)
    range_origin: float = 0.0

    def __post_init__(self):
        steps = tuple(float(s) for s in np.atleast_1d(self.step_schedule))
        object.__setattr__(self, "step_schedule", steps)
        if isinstance(self.jammer, dict):
            object.__setattr__(self, "jammer", JammerSpec(**self.jammer))
        if not self.f > 0 or not self.ts > 0:
            raise ValueError("carrier and sampling period must be positive")
        if self.l_samples < 1 or self.l_pad < 0 or self.m_compressed < 1:
            raise ValueError("invalid sample counts")
        if len(steps) < 1:
            raise ValueError("need at least one pulse")
        if not self.pri > self.window * self.ts:
            raise ValueError("PRI must exceed the sampling window (L + L~) * Ts")
        if self.noise_var < 0 or self.jammer.power < 0:
            raise ValueError("interference powers must be non-negative")

    @property
    def n_pulses(self) -> int:
        return len(self.step_schedule)

    @property
    def window(self) -> int:
        """Samples per pulse at the Nyquist rate, ``L + L~``."""
        return self.l_samples + self.l_pad

    @property
    def carriers(self) -> np.ndarray:
        return self.f + np.asarray(self.step_schedule)

    @property
    def sample_power(self) -> float:
        """Per-sample power of a unit-norm waveform column."""
        return 1.0 / self.l_samples

    @property
    def range_bin(self) -> float:
        return C * self.ts / 2

    @property
    def snr_db(self) -> float:
        return np.inf if self.noise_var == 0 else -10 * np.log10(self.noise_var)

    def with_(self, **kw) -> "RadarConfig":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["step_schedule"] = list(self.step_schedule)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RadarConfig":
        d = dict(d)
        if "jammer" in d and isinstance(d["jammer"], dict):
            d["jammer"] = JammerSpec(**d["jammer"])
        return cls(**d)


def linear_steps(delta_f: float, n_pulses: int) -> np.ndarray:
    """Linear step-frequency schedule ``(m-1) * delta_f``."""
    return delta_f * np.arange(n_pulses)


def random_steps(band: float, n_pulses: int, seed) -> np.ndarray:
    """I.i.d. uniform steps on ``[0, band]``."""
    return stream(seed, "rsfr").uniform(0.0, band, n_pulses)
