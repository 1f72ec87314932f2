"""Compressive-sensing step-frequency MIMO radar simulation.

Scene geometry, Hadamard waveforms, received-signal synthesis, sensing
matrices, Dantzig-selector recovery, matched filtering, coherence analysis,
the decoupled angle-range / Doppler-range estimator and a seeded Monte
Carlo harness.
"""
from .config import C, JammerSpec, RadarConfig, linear_steps, random_steps
from .errors import ConfigError, NotAchievable, SolverFailure, TargetOutOfWindow
from .geometry import (GridPoints, GridSpec, NodeLayout, Target, grid_coords, grid_index,
                       place_nodes_uniform_disk)
from .matched_filter import af_partial, ambiguity, mf_estimate
from .pipeline import PipelineConfig, complexity_estimate, run_pipeline
from .recovery import dantzig_select, detect, mu_threshold, omp_recover
from .sensing import (MeasurementMatrix, SensingSystem, build_sensing_system,
                      gaussian_measurements, measure)
from .synthesis import synthesize_pulse, synthesize_snapshots
from .waveform import WaveformMatrix, hadamard_waveforms

__version__ = "0.1.0"

__all__ = [
    "C", "ConfigError", "GridPoints", "GridSpec", "JammerSpec", "MeasurementMatrix",
    "NodeLayout", "NotAchievable", "PipelineConfig", "RadarConfig", "SensingSystem",
    "SolverFailure", "Target", "TargetOutOfWindow", "WaveformMatrix", "af_partial",
    "ambiguity", "build_sensing_system", "complexity_estimate", "dantzig_select", "detect",
    "gaussian_measurements", "grid_coords", "grid_index", "hadamard_waveforms",
    "linear_steps", "measure", "mf_estimate", "mu_threshold", "omp_recover",
    "place_nodes_uniform_disk", "random_steps", "run_pipeline", "synthesize_pulse",
    "synthesize_snapshots",
]
