"""Named sweeps, one per experiment family.

Every preset is a function of the run length, replicate count and base seed
so the same grid serves quick checks, desk-scale runs and full-length (400k-step) runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from ..core import FAST, SLOW, AgentClass, SimConfig, TargetParams
from .config import Axis, SweepSpec, make_axis

DESK_STEPS = 50_000
PAPER_STEPS = 400_000

K_GRID = (2, 6, 10, 14, 18, 22, 30, 40, 49)
TMEM_GRID = (0, 5, 10, 20, 35, 50)
FAST_GRID = (0, 10, 20, 30, 40, 50)


def swarm(n_slow: int, n_fast: int, k: int = 12, t_mem: int = 20, **kw) -> SimConfig:
    """Two-class swarm; both classes are always present so count axes can move agents between them."""
    classes = (
        AgentClass("slow", n_slow, SLOW.v_max, k=k, t_mem=t_mem),
        AgentClass("fast", n_fast, FAST.v_max, k=k, t_mem=t_mem),
    )
    return SimConfig(classes=classes, **kw)


def composition_axis(base: SimConfig, pairs) -> Axis:
    """Axis over (slow, fast) counts."""
    return make_axis(base, ["classes.slow.count", "classes.fast.count"], [list(p) for p in pairs])


def _connectivity(n_steps, replicates, seed, target):
    base = swarm(50, 0, n_steps=n_steps, seed=seed, target=target)
    axes = (
        composition_axis(base, [(50, 0), (5, 45)]),
        make_axis(base, "J", [1, 2, 3]),
        make_axis(base, "k", list(K_GRID)),
    )
    return SweepSpec(base, axes, replicates, "connectivity")


def _engagement(n_steps, replicates, seed, target):
    base = swarm(35, 15, n_steps=n_steps, seed=seed, target=target)
    axes = (make_axis(base, "J", [1, 2, 3]), make_axis(base, "k", list(K_GRID)))
    return SweepSpec(base, axes, replicates, "engagement-tracking")


def _memory(n_steps, replicates, seed, target):
    base = swarm(50, 0, k=14, n_steps=n_steps, seed=seed, target=target)
    axes = (composition_axis(base, [(50, 0), (35, 15)]), make_axis(base, "t_mem", list(TMEM_GRID)))
    return SweepSpec(base, axes, replicates, "memory")


def _composition(n_steps, replicates, seed, target):
    base = swarm(50, 0, k=12, n_steps=n_steps, seed=seed, target=target)
    axes = (composition_axis(base, [(50 - f, f) for f in FAST_GRID]),)
    return SweepSpec(base, axes, replicates, "composition")


def _composition_k(n_steps, replicates, seed, target):
    base = swarm(50, 0, n_steps=n_steps, seed=seed, target=target)
    axes = (
        composition_axis(base, [(50, 0), (35, 15), (20, 30), (5, 45)]),
        make_axis(base, "k", list(K_GRID)),
    )
    return SweepSpec(base, axes, replicates, "composition-k")


def _density(n_steps, replicates, seed, target):
    base = swarm(50, 0, k=14, n_steps=n_steps, seed=seed, target=target)
    axes = (
        composition_axis(base, [(50, 0), (30, 10), (20, 10), (15, 15)]),
        make_axis(base, "L", [4.0, 7.0, 10.0, 15.0, 22.0, 30.0, 45.0, 70.0, 100.0]),
    )
    return SweepSpec(base, axes, replicates, "density")


def _differentiated_k(n_steps, replicates, seed, target):
    base = swarm(30, 10, n_steps=n_steps, seed=seed, target=target)
    grid = [2, 6, 10, 14, 18]
    axes = (make_axis(base, "classes.slow.k", grid), make_axis(base, "classes.fast.k", grid))
    return SweepSpec(base, axes, replicates, "differentiated-k")


def _memory_speed(n_steps, replicates, seed, target):
    base = swarm(50, 0, k=14, n_steps=n_steps, seed=seed, target=target)
    axes = (
        make_axis(base, "classes.slow.v_max", [0.1, 0.18, 0.26]),
        make_axis(base, "t_mem", list(TMEM_GRID)),
    )
    return SweepSpec(base, axes, replicates, "memory-speed")


def _per_class_memory(n_steps, replicates, seed, target):
    base = swarm(35, 15, k=14, n_steps=n_steps, seed=seed, target=target)
    grid = [5, 20, 50]
    axes = (make_axis(base, "classes.slow.t_mem", grid), make_axis(base, "classes.fast.t_mem", grid))
    return SweepSpec(base, axes, replicates, "per-class-memory")


@dataclass(frozen=True)
class Preset:
    name: str
    family: str
    description: str
    build: Callable[..., SweepSpec]

    def spec(
        self,
        n_steps: int = DESK_STEPS,
        replicates: int = 5,
        seed: int = 0,
        target: TargetParams = TargetParams(),
    ) -> SweepSpec:
        return self.build(n_steps, replicates, seed, target)


PRESETS = {
    p.name: p
    for p in (
        Preset("connectivity", "connectivity", "k sweep, 50 slow vs 45 fast + 5 slow, J = 1..3", _connectivity),
        Preset("engagement-tracking", "engagement-tracking", "15 fast + 35 slow, k sweep, J = 1..3",
               _engagement),
        Preset("memory", "memory", "t_mem sweep at k = 14, 50 slow vs 15 fast + 35 slow", _memory),
        Preset("composition", "composition", "fast-agent count 0..50 at k = 12, t_mem = 20", _composition),
        Preset("composition-k", "connectivity", "k sweep for four fast-agent counts", _composition_k),
        Preset("density", "density", "arena side 4..100 for 50 slow and smaller mixed swarms, k = 14",
               _density),
        Preset("differentiated-k", "differentiated_k", "k_s x k_f grid, 30 slow + 10 fast", _differentiated_k),
        Preset("memory-speed", "memory-speed", "homogeneous swarms at three speeds, t_mem sweep, k = 14",
               _memory_speed),
        Preset("per-class-memory", "memory", "slow vs fast t_mem grid, 15 fast + 35 slow, k = 14",
               _per_class_memory),
    )
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None
