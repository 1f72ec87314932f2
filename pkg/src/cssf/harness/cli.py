"""Command-line entry point ``cssf``.

Exit codes: 0 success, 2 configuration error, 3 solver failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from ..errors import ConfigError, SolverFailure, TargetOutOfWindow
from .config import PRESETS, load_overrides, radar_from_dict, resolve_config

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cssf", description="CSSF MIMO radar simulations")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a preset Monte Carlo experiment")
    run.add_argument("--preset", choices=PRESETS, required=True)
    run.add_argument("--seed", type=_seed, default=None)
    run.add_argument("--trials", type=int, default=None)
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--config", help="JSON file overriding preset fields (a manifest also works)")
    run.add_argument("--workers", type=int, default=None, help="worker processes (default 1)")

    coh = sub.add_parser("coherence", help="coherence study (numeric vs closed form)")
    coh.add_argument("--delta-f", type=_floats, default=[1e6, 4e6, 8e6], help="comma separated Hz")
    coh.add_argument("--pulses", type=_ints, default=list(range(2, 31)), help="comma separated N_p")
    coh.add_argument("--draws", type=int, default=100)
    coh.add_argument("--seed", type=_seed, default=0)
    coh.add_argument("--out", required=True)

    af = sub.add_parser("af", help="ambiguity function samples over range and speed offsets")
    af.add_argument("--m-t", type=int, default=10)
    af.add_argument("--n-r", type=int, default=7)
    af.add_argument("--pulses", type=int, default=12)
    af.add_argument("--delta-f", type=float, default=1e6)
    af.add_argument("--ranges", type=_floats, default=[7.5 * k for k in range(-20, 21)],
                    help="range offsets in m, comma separated")
    af.add_argument("--speeds", type=_floats, default=[0.0])
    af.add_argument("--theta", type=float, default=0.0, help="degrees")
    af.add_argument("--theta2", type=float, default=0.0, help="degrees")
    af.add_argument("--radius", type=float, default=10.0)
    af.add_argument("--seed", type=_seed, default=0)
    af.add_argument("--out", required=True, help="CSV file")
    return p


def _cmd_run(args) -> dict:
    from .experiments import run_experiment

    over = load_overrides(args.config) if args.config else {}
    if "config" in over and isinstance(over["config"], dict):
        over = over["config"]
    preset = args.preset
    cfg = resolve_config(preset, over, seed=args.seed, trials=args.trials, workers=args.workers)
    if cfg.preset != preset:
        raise ConfigError(f"config file is for preset {cfg.preset!r}, not {preset!r}")
    return run_experiment(cfg, args.out)


def _cmd_coherence(args) -> dict:
    from .config import ExperimentConfig, preset_dict
    from .experiments import run_experiment

    d = preset_dict("coherence")
    d["scene"].update(delta_fs=args.delta_f, n_pulses=args.pulses)
    d.update(trials=args.draws, seed=args.seed)
    if any(n < 1 for n in args.pulses) or not args.pulses:
        raise ConfigError("pulse counts must be >= 1")
    return run_experiment(ExperimentConfig.from_dict(d), args.out)


def _cmd_af(args) -> dict:
    from ..config import linear_steps
    from ..geometry import place_nodes_uniform_disk
    from ..matched_filter import ambiguity_surface, write_af_csv
    from ..waveform import hadamard_waveforms
    from .config import _RADAR

    if args.pulses < 1 or args.m_t < 1 or args.n_r < 1:
        raise ConfigError("counts must be >= 1")
    cfg = radar_from_dict(_RADAR, linear_steps(args.delta_f, args.pulses))
    try:
        x = hadamard_waveforms(cfg.l_samples, args.m_t)
        layout = place_nodes_uniform_disk(args.radius, args.m_t, args.n_r, args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    samples = ambiguity_surface(args.ranges, args.speeds, np.deg2rad(args.theta),
                                np.deg2rad(args.theta2), layout, x, cfg)
    parent = os.path.dirname(os.path.abspath(args.out))
    os.makedirs(parent, exist_ok=True)
    write_af_csv(args.out, samples)
    return {"samples": len(samples), "peak": max(abs(s.value) for s in samples)}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        handler = {"run": _cmd_run, "coherence": _cmd_coherence, "af": _cmd_af}[args.command]
        summary = handler(args)
    except (ConfigError, TargetOutOfWindow) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    if args.command != "af":
        print(f"results written to {args.out}")
    else:
        print(json.dumps(summary))
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
