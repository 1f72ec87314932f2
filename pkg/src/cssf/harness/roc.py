"""Trial-level detection and false-alarm rates."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ..recovery import DetectionSet, detect


@dataclass(frozen=True)
class RocCurve:
    """``(gamma, pd, pfa)`` triples ordered by increasing ``gamma``."""

    points: tuple
    trials: int
    label: str = ""

    @property
    def gammas(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def pd(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])

    @property
    def pfa(self) -> np.ndarray:
        return np.array([p[2] for p in self.points])

    def pd_at_pfa(self, pfa_max: float) -> float:
        """Best detection rate over thresholds whose false-alarm rate is ``<= pfa_max``."""
        ok = self.pfa <= pfa_max + 1e-12
        return float(self.pd[ok].max()) if np.any(ok) else 0.0


def _detections(item, gamma) -> DetectionSet:
    if isinstance(item, DetectionSet):
        return item
    return detect(item, gamma)


def compute_roc(per_trial, gammas, label: str = "") -> RocCurve:
    """PD and PFA per threshold.

    ``per_trial`` is a list of ``(scores, truth)`` where ``scores`` is a
    coefficient or profile vector (thresholded with :func:`detect` at each
    gamma), or a callable ``gamma -> DetectionSet``, and ``truth`` the true
    grid indices (``-1`` for a target missing from the grid, which can never
    be detected). A trial counts towards PD when every true index is
    detected and towards PFA when any other index is detected.
    """
    if len(per_trial) < 1:
        raise ValueError("need at least one trial")
    gammas = np.sort(np.asarray(gammas, dtype=float))
    if gammas.size == 0:
        raise ValueError("threshold sweep is empty")
    pts = []
    for g in gammas:
        hit = fa = 0
        for item, truth in per_trial:
            det = item(g) if callable(item) else _detections(item, g)
            found = set(int(i) for i in det.indices)
            truth = set(int(t) for t in truth)
            if truth and all(t in found for t in truth):
                hit += 1
            if found - truth:
                fa += 1
        n = len(per_trial)
        pts.append((float(g), hit / n, fa / n))
    return RocCurve(tuple(pts), len(per_trial), label)


def write_roc_csv(path, curves) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["curve", "gamma", "pd", "pfa"])
        for c in curves:
            for g, pd, pfa in c.points:
                w.writerow([c.label, repr(g), repr(pd), repr(pfa)])
