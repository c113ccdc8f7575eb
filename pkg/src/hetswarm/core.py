"""Geometry helpers, configuration types and the counter-based random streams.

Positions and velocities are plain ``float64`` arrays of shape ``(2,)`` (or
``(n, 2)`` for whole populations).  The small ``_``-prefixed functions are
numba kernels shared by the per-agent API and the run engine, so the unit
tests exercise exactly the arithmetic the engine uses.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any

import numpy as np
from numba import njit

__all__ = [
    "AgentClass",
    "ArenaConfig",
    "ConfigError",
    "CorruptedStateError",
    "SimConfig",
    "StrategyParams",
    "TargetParams",
    "clamp_to_arena",
    "counter_uniform",
    "normalize_to_speed",
]

BOUNDARY_MODES = ("reflect", "clamp")
PLACEMENTS = ("uniform", "grid")

# Named random substreams; each draw is keyed by (seed, stream, step, index, draw).
STREAM_AGENT_EPS = 1
STREAM_AGENT_SINGULAR = 2
STREAM_TARGET_WAYPOINT = 3
STREAM_TARGET_SINGULAR = 4


class ConfigError(ValueError):
    """Invalid simulation or sweep configuration."""


class CorruptedStateError(FloatingPointError):
    """A non-finite value entered the simulation state."""


# --------------------------------------------------------------------------
# numba kernels
# --------------------------------------------------------------------------

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)


@njit(cache=True, inline="always")
def _splitmix(z):
    z = z + _GOLDEN
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


@njit(cache=True, inline="always")
def counter_uniform(seed, stream, step, index, draw):
    """Uniform draw in [0, 1) addressed by ``(seed, stream, step, index, draw)``.

    A splitmix64 hash chain over the key.  Draws for different agents or
    steps never share state, so results do not depend on evaluation order.
    """
    h = _splitmix(np.uint64(seed))
    h = _splitmix(h ^ np.uint64(stream))
    h = _splitmix(h ^ np.uint64(step))
    h = _splitmix(h ^ np.uint64(index))
    h = _splitmix(h ^ np.uint64(draw))
    return (h >> _S11) * (1.0 / 9007199254740992.0)


@njit(cache=True, inline="always")
def _inverse_power(a_r, r, d):
    """``(a_r / r)**d / r`` for integer ``d >= 1`` without a libm pow call."""
    x = a_r / r
    p = x
    for _ in range(d - 1):
        p *= x
    return p / r


@njit(cache=True, inline="always")
def _normalize(vx, vy, v_max):
    n = math.hypot(vx, vy)  # no underflow for tiny vectors
    if n == 0.0:
        return 0.0, 0.0
    return vx / n * v_max, vy / n * v_max


@njit(cache=True, inline="always")
def _bound(px, py, vx, vy, side, reflect):
    """Clamp a position into [0, side]^2.

    With ``reflect`` the velocity component normal to a touched wall is
    negated; otherwise the velocity is returned untouched.
    """
    if px < 0.0:
        px = 0.0
        if reflect and vx < 0.0:
            vx = -vx
    elif px > side:
        px = side
        if reflect and vx > 0.0:
            vx = -vx
    if py < 0.0:
        py = 0.0
        if reflect and vy < 0.0:
            vy = -vy
    elif py > side:
        py = side
        if reflect and vy > 0.0:
            vy = -vy
    return px, py, vx, vy


# --------------------------------------------------------------------------
# public vector operations
# --------------------------------------------------------------------------


def _as_vec(v) -> np.ndarray:
    a = np.asarray(v, dtype=np.float64)
    if a.shape != (2,):
        raise ValueError(f"expected a 2-vector, got shape {a.shape}")
    return a


def normalize_to_speed(v, v_max: float) -> np.ndarray:
    """Rescale ``v`` to magnitude ``v_max``; the zero vector stays at rest."""
    a = _as_vec(v)
    if not np.all(np.isfinite(a)):
        raise CorruptedStateError(f"non-finite velocity {a!r}")
    if not v_max > 0:
        raise ValueError("v_max must be positive")
    return np.array(_normalize(a[0], a[1], float(v_max)))


def clamp_to_arena(p, arena: "ArenaConfig") -> np.ndarray:
    a = _as_vec(p)
    return np.clip(a, 0.0, arena.side_length)


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ArenaConfig:
    side_length: float = 30.0

    def __post_init__(self):
        if not (math.isfinite(self.side_length) and self.side_length > 0):
            raise ConfigError(f"arena.side_length must be > 0, got {self.side_length}")
        if not 4 <= self.side_length <= 445:
            warnings.warn(
                f"arena.side_length={self.side_length} lies outside the tested range [4, 445]",
                stacklevel=3,
            )


@dataclass(frozen=True)
class AgentClass:
    """Capability bundle shared by every agent of one class."""

    name: str
    count: int
    v_max: float
    k: int = 12
    t_mem: int = 20


@dataclass(frozen=True)
class StrategyParams:
    omega: float = 1.0
    c: float = 0.5
    a_R_agent: float = 1.0
    d_agent: int = 2
    gamma_track: float = 0.3
    share_hops: int = 2  # relays an observation may take; 1 = first-hand sightings only


@dataclass(frozen=True)
class TargetParams:
    v_max: float = 0.3
    rho: float = 1.0
    a_R: float = 1.0
    d: int = 2
    t_limit: int = 5
    t_evade: int = 20
    waypoint_tolerance: float = 0.5
    redraw_waypoint: bool = True


SLOW = AgentClass("slow", 50, 0.1)
FAST = AgentClass("fast", 0, 0.26)


def _default_classes() -> tuple[AgentClass, ...]:
    return (SLOW,)


@dataclass(frozen=True)
class SimConfig:
    arena: ArenaConfig = field(default_factory=ArenaConfig)
    classes: tuple[AgentClass, ...] = field(default_factory=_default_classes)
    target_count: int = 1
    target: TargetParams = field(default_factory=TargetParams)
    strategy: StrategyParams = field(default_factory=StrategyParams)
    n_steps: int = 50_000
    seed: int = 0
    burn_in: int = 0
    placement: str = "uniform"
    boundary: str = "reflect"
    series_every: int = 100

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))
        self.validate()

    # -- derived -----------------------------------------------------------

    @property
    def n_agents(self) -> int:
        return sum(c.count for c in self.classes)

    @property
    def density(self) -> float:
        return self.n_agents / self.arena.side_length**2

    def class_of(self, name: str) -> AgentClass:
        for c in self.classes:
            if c.name == name:
                return c
        raise KeyError(name)

    def agent_arrays(self) -> dict[str, np.ndarray]:
        """Per-agent class index, v_max, k and t_mem, agents grouped by class."""
        idx = np.repeat(np.arange(len(self.classes)), [c.count for c in self.classes])
        pick = lambda attr, dt: np.array([getattr(self.classes[i], attr) for i in idx], dtype=dt)
        return {
            "class_index": idx.astype(np.int64),
            "v_max": pick("v_max", np.float64),
            "k": pick("k", np.int64),
            "t_mem": pick("t_mem", np.int64),
        }

    # -- validation --------------------------------------------------------

    def validate(self) -> None:
        n = self.n_agents
        if n < 2:
            raise ConfigError(f"classes: swarm needs N >= 2 agents, got {n}")
        names = [c.name for c in self.classes]
        if len(set(names)) != len(names):
            raise ConfigError(f"classes: duplicate class names {names}")
        for c in self.classes:
            key = f"classes.{c.name}"
            if c.count < 0:
                raise ConfigError(f"{key}.count must be >= 0, got {c.count}")
            if not (math.isfinite(c.v_max) and c.v_max > 0):
                raise ConfigError(f"{key}.v_max must be > 0, got {c.v_max}")
            if c.count and not 1 <= c.k <= n - 1:
                raise ConfigError(f"{key}.k={c.k} outside k in [1, N-1] = [1, {n - 1}]")
            if c.t_mem < 0:
                raise ConfigError(f"{key}.t_mem must be >= 0, got {c.t_mem}")
        if self.target_count < 0:
            raise ConfigError(f"target_count must be >= 0, got {self.target_count}")
        t = self.target
        if t.v_max < 0:
            raise ConfigError(f"target.v_max must be >= 0, got {t.v_max}")
        for key in ("rho", "a_R", "waypoint_tolerance"):
            if not getattr(t, key) > 0:
                raise ConfigError(f"target.{key} must be > 0, got {getattr(t, key)}")
        if t.d < 1:
            raise ConfigError(f"target.d must be >= 1, got {t.d}")
        if t.t_limit < 1:
            raise ConfigError(f"target.t_limit must be >= 1, got {t.t_limit}")
        if t.t_evade < 0:
            raise ConfigError(f"target.t_evade must be >= 0, got {t.t_evade}")
        s = self.strategy
        if not s.a_R_agent > 0:
            raise ConfigError(f"strategy.a_R_agent must be > 0, got {s.a_R_agent}")
        if s.d_agent < 1:
            raise ConfigError(f"strategy.d_agent must be >= 1, got {s.d_agent}")
        if not 0 <= s.gamma_track <= 1:
            raise ConfigError(f"strategy.gamma_track must lie in [0, 1], got {s.gamma_track}")
        if s.share_hops < 0:
            raise ConfigError(f"strategy.share_hops must be >= 0, got {s.share_hops}")
        if self.n_steps < 1:
            raise ConfigError(f"n_steps must be >= 1, got {self.n_steps}")
        if not 0 <= self.burn_in < self.n_steps:
            raise ConfigError(f"burn_in must lie in [0, n_steps), got {self.burn_in}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.placement not in PLACEMENTS:
            raise ConfigError(f"placement must be one of {PLACEMENTS}, got {self.placement!r}")
        if self.boundary not in BOUNDARY_MODES:
            raise ConfigError(f"boundary must be one of {BOUNDARY_MODES}, got {self.boundary!r}")
        if self.series_every < 1:
            raise ConfigError(f"series_every must be >= 1, got {self.series_every}")

    # -- (de)serialisation -------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["classes"] = [asdict(c) for c in self.classes]
        return d

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SimConfig":
        """Build a config from nested mappings; unknown keys raise ConfigError."""
        data = dict(data)
        _check_keys("", data, {f.name for f in fields(cls)})
        kw: dict[str, Any] = {}
        for name, sub in (("arena", ArenaConfig), ("target", TargetParams), ("strategy", StrategyParams)):
            if name in data:
                section = data.pop(name)
                if not isinstance(section, dict):
                    raise ConfigError(f"{name} must be a table")
                _check_keys(name + ".", section, {f.name for f in fields(sub)})
                kw[name] = _build(sub, section, name + ".")
        if "classes" in data:
            raw = data.pop("classes")
            if not isinstance(raw, list) or not raw:
                raise ConfigError("classes must be a non-empty list of tables")
            out = []
            for i, c in enumerate(raw):
                label = f"classes[{c.get('name', i) if isinstance(c, dict) else i}]."
                if not isinstance(c, dict):
                    raise ConfigError(f"{label} must be a table")
                _check_keys(label, c, {f.name for f in fields(AgentClass)})
                if "name" not in c or "count" not in c:
                    raise ConfigError(f"{label} requires 'name' and 'count'")
                base = FAST if c.get("name") == "fast" else SLOW
                out.append(_build(AgentClass, {**asdict(base), **c}, label))
            kw["classes"] = tuple(out)
        types = {f.name: f.type for f in fields(cls)}
        for k, v in data.items():
            if types[k] == "int" and (isinstance(v, bool) or not isinstance(v, (int, np.integer))):
                raise ConfigError(f"{k} must be an integer, got {v!r}")
            if types[k] == "str" and not isinstance(v, str):
                raise ConfigError(f"{k} must be a string, got {v!r}")
            kw[k] = int(v) if types[k] == "int" else v
        try:
            return cls(**kw)
        except TypeError as e:
            raise ConfigError(str(e)) from None

    def with_updates(self, **changes) -> "SimConfig":
        return replace(self, **changes)


def _check_keys(prefix: str, data: dict, allowed: set[str]) -> None:
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(prefix + u for u in unknown)}")


def _build(kind, values: dict, prefix: str):
    types = {f.name: f.type for f in fields(kind)}
    clean = {}
    for k, v in values.items():
        t = types[k]
        if t in ("int", int):
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                if isinstance(v, float) and v.is_integer():
                    v = int(v)
                else:
                    raise ConfigError(f"{prefix}{k} must be an integer, got {v!r}")
        elif t in ("float", float):
            if isinstance(v, bool) or not isinstance(v, (int, float, np.number)):
                raise ConfigError(f"{prefix}{k} must be a number, got {v!r}")
            v = float(v)
        clean[k] = v
    return kind(**clean)
