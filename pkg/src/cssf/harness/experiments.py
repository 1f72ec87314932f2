"""Seeded Monte Carlo runners for the preset experiments.

Every trial draws its randomness from ``trial_seed(seed, t)`` so results do
not depend on worker count or scheduling. Outputs are CSV files plus a
``manifest.json`` echoing the resolved config; nothing time-dependent is
written, so identical configs give byte-identical files.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from ..coherence import coherence_study, write_coherence_csv
from ..config import linear_steps, random_steps
from ..geometry import GridSpec, Target, place_nodes_uniform_disk
from ..matched_filter import mf_estimate
from ..pipeline import interference_variance, run_pipeline
from ..recovery import dantzig_select, mu_threshold
from ..rng import stream, trial_seed
from ..sensing import (MeasurementMatrix, build_sensing_system, gaussian_measurements,
                       measure)
from ..synthesis import synthesize_snapshots
from ..waveform import hadamard_waveforms
from .config import ExperimentConfig, pipeline_from_dict, radar_from_dict
from .roc import RocCurve, compute_roc, write_roc_csv

log = logging.getLogger("cssf.harness")

PFA_GRID = tuple(round(0.05 * k, 2) for k in range(1, 11))


def _unit_phases(seed, n):
    return np.exp(2j * np.pi * stream(seed, "beta").random(n))


def local_peaks_ok(profile, truth, ratio: float = 0.5) -> bool:
    """True when every true index is a local maximum of ``profile`` and all
    other local maxima stay below ``ratio`` times the smallest true peak.

    Plateaus count as maxima; zero entries never do.
    """
    p = np.asarray(profile, dtype=float)
    n = p.size
    peaks = [i for i in range(n) if p[i] > 0
             and (i == 0 or p[i] >= p[i - 1]) and (i == n - 1 or p[i] >= p[i + 1])]
    truth = [int(t) for t in truth]
    if not all(t in peaks for t in truth):
        return False
    spur = [p[i] for i in peaks if i not in truth]
    return (max(spur) if spur else 0.0) < ratio * min(p[truth])


def _normalise(v):
    v = np.abs(np.asarray(v)).astype(float)
    m = v.max()
    return v / m if m > 0 else v


# -- range resolution --------------------------------------------------------

def range_resolution_trial(cfg_d: dict, t: int) -> dict:
    sc, gd = cfg_d["scene"], cfg_d["grid"]
    ts = trial_seed(cfg_d["seed"], t)
    steps = random_steps(sc["band"], sc["n_pulses"], ts)
    cfg = radar_from_dict(cfg_d["radar"], steps)
    x = hadamard_waveforms(cfg.l_samples, sc["m_t"])
    layout = place_nodes_uniform_disk(sc["radius"], sc["m_t"], sc["n_r"], ts)
    grid = GridSpec(np.deg2rad(gd["angles_deg"]), gd["speeds"], gd["ranges"])
    pts = grid.points()
    angle = float(np.deg2rad(sc["angle_deg"]))
    beta = _unit_phases(ts, len(sc["ranges"]))
    targets = [Target(angle, r, sc["speed"], b) for r, b in zip(sc["ranges"], beta)]
    truth = [pts.index_of(angle, sc["speed"], r, atol=1e-6) for r in sc["ranges"]]
    snaps = synthesize_snapshots(targets, layout, x, cfg, seed=ts)
    phis = gaussian_measurements(cfg, layout.n_r, ts)
    cs_sys = build_sensing_system(grid, layout, x, cfg, phis)
    r = measure(cs_sys, snaps, phis)
    mu = mu_threshold(cs_sys, interference_variance(cfg))
    cs = _normalise(dantzig_select(cs_sys, r, mu).coefficients)
    eye = [MeasurementMatrix.identity(cfg.window)] * layout.n_r
    mf_sys = build_sensing_system(grid, layout, x, cfg, eye)
    mf = _normalise(mf_estimate(mf_sys, measure(mf_sys, snaps, eye)))
    ratio = sc["peak_ratio"]
    return {"trial": t, "ranges": list(pts.ranges), "cs": cs.tolist(), "mf": mf.tolist(),
            "cs_ok": bool(local_peaks_ok(cs, truth, ratio)),
            "mf_ok": bool(local_peaks_ok(mf, truth, ratio))}


def _finish_range_resolution(results, out):
    with open(os.path.join(out, "profiles.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["trial", "range", "cs", "mf"])
        for res in results:
            for c, a, b in zip(res["ranges"], res["cs"], res["mf"]):
                w.writerow([res["trial"], repr(c), repr(a), repr(b)])
    n = len(results)
    return {"cs_success_rate": sum(r["cs_ok"] for r in results) / n,
            "mf_success_rate": sum(r["mf_ok"] for r in results) / n,
            "cs_ok": [r["cs_ok"] for r in results], "mf_ok": [r["mf_ok"] for r in results]}


# -- ROC over range ----------------------------------------------------------

def _schedule(curve, delta_f, seed):
    n = int(curve["n_pulses"])
    if curve["schedule"] == "linear":
        return linear_steps(delta_f, n)
    band = curve.get("band", (n - 1) * delta_f)
    return random_steps(band, n, (*seed, "curve", curve["label"]))


def roc_range_trial(cfg_d: dict, t: int) -> dict:
    sc = cfg_d["scene"]
    ts = trial_seed(cfg_d["seed"], t)
    g = stream(ts, "scene")
    lo, hi = sc["angle_range_deg"]
    angle = float(np.deg2rad(g.uniform(lo, hi)))
    speed = float(g.uniform(*sc["speed_range"]))
    layout = place_nodes_uniform_disk(sc["radius"], sc["m_t"], sc["n_r"], ts)
    beta = _unit_phases(ts, len(sc["ranges"]))
    targets = [Target(angle, r, speed, b) for r, b in zip(sc["ranges"], beta)]
    grid = GridSpec([angle], [speed], cfg_d["grid"]["ranges"])
    pts = grid.points()
    truth = [pts.index_of(angle, speed, r, atol=1e-6) for r in sc["ranges"]]
    out = {"trial": t, "truth": truth, "scores": {}}
    base = radar_from_dict(cfg_d["radar"])
    x = hadamard_waveforms(base.l_samples, sc["m_t"])
    for curve in sc["curves"]:
        cfg = base.with_(step_schedule=tuple(_schedule(curve, sc["delta_f"], ts)))
        snaps = synthesize_snapshots(targets, layout, x, cfg, seed=ts)
        if curve["estimator"] == "cs":
            phis = gaussian_measurements(cfg, layout.n_r, ts)
            system = build_sensing_system(grid, layout, x, cfg, phis)
            r = measure(system, snaps, phis)
            mu = mu_threshold(system, interference_variance(cfg))
            s = np.abs(dantzig_select(system, r, mu).coefficients)
        else:
            eye = [MeasurementMatrix.identity(cfg.window)] * layout.n_r
            system = build_sensing_system(grid, layout, x, cfg, eye)
            s = mf_estimate(system, measure(system, snaps, eye))
        out["scores"][curve["label"]] = s.tolist()
    return out


def _curves_from_scores(results, labels, gammas):
    curves = []
    for lab in labels:
        per = [(np.asarray(r["scores"][lab]), r["truth"] if "truth" in r else r["truths"][lab])
               for r in results]
        curves.append(compute_roc(per, gammas, lab))
    return curves


def _roc_summary(curves):
    return {c.label: {"pd_at_pfa": {repr(p): c.pd_at_pfa(p) for p in PFA_GRID}} for c in curves}


def _finish_roc(results, out, cfg: ExperimentConfig, labels):
    curves = _curves_from_scores(results, labels, cfg.gammas)
    write_roc_csv(os.path.join(out, "roc.csv"), curves)
    return {"curves": _roc_summary(curves)}


# -- joint angle-speed-range -------------------------------------------------

def _joint_scene(sc, ts):
    g = stream(ts, "scene")
    step_a, step_r = sc["angle_spacing_deg"], sc["range_spacing"]
    a_lo, a_hi = sc["angle_start_deg"]
    r_lo, r_hi = sc["range_start"]
    a0 = a_lo + step_a * g.integers(0, int(round((a_hi - a_lo) / step_a)) + 1)
    r0 = r_lo + step_r * g.integers(0, int(round((r_hi - r_lo) / step_r)) + 1)
    beta = _unit_phases(ts, len(sc["speeds"]))
    return [Target(float(np.deg2rad(round(a0 + k * step_a, 9))), round(r0 + k * step_r, 9),
                   float(v), b) for k, (v, b) in enumerate(zip(sc["speeds"], beta))]


def roc_joint_trial(cfg_d: dict, t: int) -> dict:
    sc = cfg_d["scene"]
    ts = trial_seed(cfg_d["seed"], t)
    cfg = radar_from_dict(cfg_d["radar"], linear_steps(sc["delta_f"], sc["n_pulses"]))
    pcfg = pipeline_from_dict(cfg_d["pipeline"])
    x = hadamard_waveforms(cfg.l_samples, sc["m_t"])
    layout = place_nodes_uniform_disk(sc["radius"], sc["m_t"], sc["n_r"], ts)
    targets = _joint_scene(sc, ts)
    noisy = cfg.noise_var > 0 or cfg.jammer.power > 0
    snaps = synthesize_snapshots(targets, layout, x, cfg, seed=ts if noisy else None)
    phis = gaussian_measurements(cfg, layout.n_r, ts)
    out = {"trial": t, "scores": {}, "truths": {}, "exact": {}}
    for est in cfg_d["estimators"]:
        s2 = run_pipeline(snaps, layout, x, cfg, pcfg, phis, est)["step2"]
        truth = [s2.grid.index_of(tg.angle, tg.speed, tg.range0, atol=1e-6) for tg in targets]
        lab = est.upper()
        out["scores"][lab] = s2.scores.tolist()
        out["truths"][lab] = truth
        found = sorted(zip(np.round(s2.angles, 9), np.round(s2.speeds, 9), np.round(s2.ranges, 9)))
        want = sorted((round(tg.angle, 9), round(tg.speed, 9), round(tg.range0, 9)) for tg in targets)
        out["exact"][lab] = bool(found == want)
    return out


def _finish_joint(results, out, cfg: ExperimentConfig):
    labels = [e.upper() for e in cfg.estimators]
    curves = _curves_from_scores(results, labels, cfg.gammas)
    write_roc_csv(os.path.join(out, "roc.csv"), curves)
    summary = {"curves": _roc_summary(curves)}
    for lab in labels:
        summary["curves"][lab]["exact_rate"] = sum(r["exact"][lab] for r in results) / len(results)
    return summary


# -- driver ------------------------------------------------------------------

_TRIALS = {"range-resolution": range_resolution_trial, "roc-range": roc_range_trial,
           "custom": roc_range_trial, "roc-joint": roc_joint_trial}


def _call(args):
    fn, cfg_d, t = args
    return fn(cfg_d, t)


def run_trials(cfg: ExperimentConfig) -> list:
    """Per-trial results ordered by trial index."""
    fn = _TRIALS[cfg.preset]
    d = cfg.to_dict()
    jobs = [(fn, d, t) for t in range(cfg.trials)]
    if cfg.workers == 1:
        results = [_call(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_call, jobs))
    return sorted(results, key=lambda r: r["trial"])


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_coherence(cfg: ExperimentConfig, out: str) -> dict:
    sc = cfg.scene
    base = radar_from_dict(cfg.radar)
    reports = []
    summary = {}
    for df in sc["delta_fs"]:
        res = coherence_study(df, sc["n_pulses"], cfg.trials, (cfg.seed, "delta_f", int(df)), base,
                              m_t=sc["m_t"], radius=sc.get("radius", 10.0),
                              angle=float(np.deg2rad(sc.get("angle_deg", 0.0))),
                              ranges=tuple(sc["ranges"]))
        for kind in ("linear", "random"):
            reports.extend(res[kind])
            summary[f"{kind}@{df!r}"] = {str(r.n_pulses): [r.numeric, r.theory] for r in res[kind]}
    write_coherence_csv(os.path.join(out, "coherence.csv"), reports)
    return summary


def run_experiment(cfg: ExperimentConfig, out: str | None = None) -> dict:
    """Run ``cfg`` and write its result files into ``out``.

    Returns the summary also stored in ``summary.json``.
    """
    out = out or cfg.out
    if not out:
        from ..errors import ConfigError
        raise ConfigError("no output directory given")
    os.makedirs(out, exist_ok=True)
    log.info("running %s: %d trials, seed %d", cfg.preset, cfg.trials, cfg.seed)
    if cfg.preset == "coherence":
        summary = run_coherence(cfg, out)
    else:
        results = run_trials(cfg)
        if cfg.preset == "range-resolution":
            summary = _finish_range_resolution(results, out)
        elif cfg.preset == "roc-joint":
            summary = _finish_joint(results, out, cfg)
        else:
            summary = _finish_roc(results, out, cfg, [c["label"] for c in cfg.scene["curves"]])
    _write_json(os.path.join(out, "summary.json"), summary)
    files = sorted(f for f in os.listdir(out) if f != "manifest.json")
    resolved = cfg.to_dict()
    resolved["out"] = None
    _write_json(os.path.join(out, "manifest.json"),
                {"config": resolved, "seed": cfg.seed, "trials": cfg.trials,
                 "files": {f: _sha256(os.path.join(out, f)) for f in files}})
    return summary


def load_roc_csv(path) -> dict:
    """``{label: RocCurve}`` from a file written by :func:`write_roc_csv`."""
    rows = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rows.setdefault(row["curve"], []).append(
                (float(row["gamma"]), float(row["pd"]), float(row["pfa"])))
    return {k: RocCurve(tuple(v), 0, k) for k, v in rows.items()}
