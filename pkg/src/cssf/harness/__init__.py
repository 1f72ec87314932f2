"""Experiment configuration, Monte Carlo runners and the command-line tool."""
from .config import PRESETS, ExperimentConfig, preset_dict, resolve_config
from .experiments import local_peaks_ok, run_experiment, run_trials
from .roc import RocCurve, compute_roc, write_roc_csv

__all__ = ["PRESETS", "ExperimentConfig", "preset_dict", "resolve_config", "local_peaks_ok",
           "run_experiment", "run_trials", "RocCurve", "compute_roc", "write_roc_csv"]
