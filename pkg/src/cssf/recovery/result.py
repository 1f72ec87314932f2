"""Result and detection records shared by all solvers."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

log = logging.getLogger("cssf.recovery")


@dataclass(frozen=True)
class SolverStats:
    solver: str
    status: str
    iterations: int
    primal_residual: float = 0.0
    dual_residual: float = 0.0
    gap: float = 0.0
    wall_time: float = 0.0
    constraint_violation: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class RecoveryResult:
    coefficients: np.ndarray
    stats: SolverStats
    mu: float | None = None

    @property
    def amplitudes(self) -> np.ndarray:
        return np.abs(self.coefficients)


@dataclass(frozen=True)
class DetectionSet:
    indices: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    amplitudes: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __len__(self) -> int:
        return len(self.indices)

    def __contains__(self, n) -> bool:
        return bool(np.any(self.indices == n))


def detect(result, gamma: float) -> DetectionSet:
    """Indices with ``|s_n| >= gamma * max |s|``; tied maxima are all kept.

    ``result`` may be a :class:`RecoveryResult` or any coefficient vector
    (a real vector is treated as amplitudes).
    """
    if not 0 < gamma <= 1:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    coef = result.coefficients if isinstance(result, RecoveryResult) else result
    amp = np.abs(np.asarray(coef))
    peak = amp.max() if amp.size else 0.0
    if peak <= 0:
        return DetectionSet()
    idx = np.flatnonzero(amp >= gamma * peak)
    return DetectionSet(idx, amp[idx])


def log_stats(stats: SolverStats, **extra) -> None:
    log.debug("solver finished", extra={"solver_stats": {**stats.to_dict(), **extra}})
