"""Experiment harness: config files, sweeps, CSV tables, plot data and presets."""

from .config import Axis, SweepSpec, flatten, load_config, make_axis, parse_config
from .plots import FAMILIES, emit_plot_data
from .presets import PRESETS, get_preset, swarm
from .sweep import RunRecord, SweepResult, run_sweep

__all__ = [
    "Axis",
    "FAMILIES",
    "PRESETS",
    "RunRecord",
    "SweepResult",
    "SweepSpec",
    "emit_plot_data",
    "flatten",
    "get_preset",
    "load_config",
    "make_axis",
    "parse_config",
    "run_sweep",
    "swarm",
]
