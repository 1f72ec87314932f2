"""Experiment configuration and the built-in presets.

A config is a plain JSON-compatible tree. Presets provide the defaults and a
user file may override any field (nested dicts merge key by key). Angles in
config files are degrees; everything else is SI.
"""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field

import numpy as np

from ..config import JammerSpec, RadarConfig
from ..errors import ConfigError
from ..pipeline import PipelineConfig

PRESETS = ("range-resolution", "coherence", "roc-range", "roc-joint", "custom")
ROC_PRESETS = ("roc-range", "roc-joint", "custom")

_RADAR = {"f": 5e9, "pri": 250e-6, "ts": 100e-9, "l_samples": 512, "l_pad": 153,
          "m_compressed": 10, "noise_var": 1.0,
          "jammer": {"angle_deg": 7.0, "power": 0.0}, "range_origin": 0.0}

_DEFAULT_GAMMAS = [round(0.01 * k, 2) for k in range(1, 101)]


def _radar(**kw) -> dict:
    d = copy.deepcopy(_RADAR)
    for k, v in kw.items():
        if isinstance(v, dict):
            d[k].update(v)
        else:
            d[k] = v
    return d


def _axis(start, step, count) -> list:
    return [round(start + step * k, 9) for k in range(count)]


_ROC_CURVES = [
    {"label": "CS-LSFR-9", "estimator": "cs", "schedule": "linear", "n_pulses": 9},
    {"label": "CS-RSFR-12", "estimator": "cs", "schedule": "random", "n_pulses": 12},
    {"label": "CS-LSFR-12", "estimator": "cs", "schedule": "linear", "n_pulses": 12},
    {"label": "MF-LSFR-12", "estimator": "mf", "schedule": "linear", "n_pulses": 12},
    {"label": "MF-RSFR-12", "estimator": "mf", "schedule": "random", "n_pulses": 12},
]

_PRESET_DATA = {
    "range-resolution": {
        "radar": _radar(noise_var=0.01),
        "scene": {"m_t": 1, "n_r": 1, "radius": 10.0, "angle_deg": 0.0, "speed": 0.0,
                  "ranges": [1024.0, 1028.0, 1032.0, 1036.0, 1040.0, 1044.0],
                  "band": 29e6, "n_pulses": 30, "peak_ratio": 0.5},
        "grid": {"angles_deg": [0.0], "speeds": [0.0], "ranges": _axis(1010.0, 2.0, 25)},
        "trials": 50,
    },
    "coherence": {
        "radar": _radar(noise_var=0.0),
        "scene": {"m_t": 10, "radius": 10.0, "angle_deg": 0.0, "ranges": [1050.0, 1057.5],
                  "delta_fs": [1e6, 4e6, 8e6], "n_pulses": list(range(2, 31))},
        "grid": None,
        "trials": 100,
    },
    "roc-range": {
        "radar": _radar(noise_var=1.0, jammer={"power": 4.0}),
        "scene": {"m_t": 10, "n_r": 1, "radius": 10.0, "ranges": [1005.0, 1010.0, 1045.0],
                  "angle_range_deg": [-30.0, 30.0], "speed_range": [0.0, 60.0],
                  "delta_f": 1e6, "curves": copy.deepcopy(_ROC_CURVES)},
        "grid": {"ranges": _axis(990.0, 5.0, 15)},
        "trials": 200,
    },
    "roc-joint": {
        "radar": _radar(noise_var=1.0, jammer={"power": 4.0}),
        "scene": {"m_t": 10, "n_r": 7, "radius": 10.0, "n_pulses": 12, "delta_f": 1e6,
                  "speeds": [10.0, 30.0, 60.0], "angle_spacing_deg": 0.3,
                  "range_spacing": 7.5, "angle_start_deg": [-9.9, 9.3],
                  "range_start": [1000.0, 1067.5]},
        "grid": None,
        "pipeline": {"n_nyquist_nodes": 7,
                     "coarse_angles_deg": _axis(-12.0, 0.6, 41),
                     "coarse_ranges": _axis(975.0, 15.0, 14),
                     "speeds": _axis(0.0, 10.0, 8)},
        "trials": 200,
        "estimators": ["cs", "mf"],
    },
}
_PRESET_DATA["custom"] = copy.deepcopy(_PRESET_DATA["roc-range"])


def preset_dict(name: str) -> dict:
    """Fully populated default config tree of preset ``name``."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose one of {', '.join(PRESETS)}")
    d = copy.deepcopy(_PRESET_DATA[name])
    d.setdefault("pipeline", None)
    d.setdefault("estimators", None)
    d.update(preset=name, seed=0, gammas=list(_DEFAULT_GAMMAS), workers=1, out=None)
    return d


def merge(base: dict, over: dict) -> dict:
    """Recursive dict update; non-dict values replace."""
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def radar_from_dict(d: dict, step_schedule=(0.0,)) -> RadarConfig:
    d = dict(d)
    jam = dict(d.pop("jammer", {}))
    angle = np.deg2rad(jam.pop("angle_deg", 7.0))
    try:
        return RadarConfig(step_schedule=tuple(step_schedule),
                           jammer=JammerSpec(float(angle), float(jam.pop("power", 0.0))), **d)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid radar settings: {exc}") from exc


def pipeline_from_dict(d: dict) -> PipelineConfig:
    d = dict(d)
    d["coarse_angles"] = tuple(np.deg2rad(d.pop("coarse_angles_deg")))
    try:
        return PipelineConfig(**d)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid pipeline settings: {exc}") from exc


@dataclass
class ExperimentConfig:
    """Resolved experiment description (preset defaults plus overrides)."""

    preset: str
    radar: dict
    scene: dict
    grid: dict | None
    trials: int
    seed: int
    gammas: list = field(default_factory=lambda: list(_DEFAULT_GAMMAS))
    pipeline: dict | None = None
    estimators: list | None = None
    workers: int = 1
    out: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.preset not in PRESETS:
            raise ConfigError(f"unknown preset {self.preset!r}")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError("trials must be an integer >= 1")
        if not isinstance(self.seed, int) or self.seed < 0 or self.seed >= 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.preset in ROC_PRESETS:
            g = np.asarray(self.gammas, dtype=float)
            if g.size == 0:
                raise ConfigError("threshold sweep is empty")
            if np.any(g <= 0) or np.any(g > 1):
                raise ConfigError("thresholds must lie in (0, 1]")
        # resolve once so bad values fail before any computation
        radar_from_dict(self.radar)
        if self.pipeline is not None:
            pipeline_from_dict(self.pipeline)
        need = {"range-resolution": ("ranges", "band", "n_pulses", "m_t", "n_r"),
                "coherence": ("delta_fs", "n_pulses", "m_t", "ranges"),
                "roc-range": ("ranges", "curves", "m_t", "n_r", "delta_f"),
                "custom": ("ranges", "curves", "m_t", "n_r", "delta_f"),
                "roc-joint": ("n_pulses", "speeds", "m_t", "n_r", "delta_f")}[self.preset]
        missing = [k for k in need if k not in self.scene]
        if missing:
            raise ConfigError(f"scene is missing {', '.join(missing)}")
        if self.preset in ("roc-range", "custom"):
            for c in self.scene["curves"]:
                if c.get("estimator") not in ("cs", "mf") or c.get("schedule") not in ("linear", "random"):
                    raise ConfigError(f"bad curve spec {c!r}")
                if int(c.get("n_pulses", 0)) < 1:
                    raise ConfigError("curve n_pulses must be >= 1")
        if self.preset == "roc-joint" and self.pipeline is None:
            raise ConfigError("roc-joint needs a pipeline section")

    def to_dict(self) -> dict:
        return {"preset": self.preset, "seed": self.seed, "trials": self.trials,
                "gammas": list(self.gammas), "workers": self.workers, "out": self.out,
                "radar": self.radar, "scene": self.scene, "grid": self.grid,
                "pipeline": self.pipeline, "estimators": self.estimators}

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {"preset", "seed", "trials", "gammas", "workers", "out", "radar", "scene",
                 "grid", "pipeline", "estimators"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config fields: {', '.join(sorted(extra))}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


def resolve_config(preset: str, overrides: dict | None = None, **fields) -> ExperimentConfig:
    """Preset defaults, then ``overrides`` (a config tree), then keyword fields."""
    d = preset_dict(preset)
    if overrides:
        if "preset" in overrides and overrides["preset"] != preset:
            d = preset_dict(overrides["preset"])
        d = merge(d, overrides)
    d.update({k: v for k, v in fields.items() if v is not None})
    return ExperimentConfig.from_dict(d)


def load_overrides(path) -> dict:
    try:
        with open(path) as fh:
            d = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(d, dict):
        raise ConfigError("config file must hold a JSON object")
    return d
