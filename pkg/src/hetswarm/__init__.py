"""Heterogeneous swarm search-and-track simulator for fast evasive targets."""

from .core import (
    AgentClass,
    ArenaConfig,
    ConfigError,
    CorruptedStateError,
    SimConfig,
    StrategyParams,
    TargetParams,
    clamp_to_arena,
    normalize_to_speed,
)
from .engine import RunResult, coverage, run_simulation
from .network import Topology, build_topology

__version__ = "0.1.0"
