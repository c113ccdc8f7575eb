"""TOML configuration files and sweep grids.

A file without a ``[sweep]`` table describes one run::

    seed = 3
    n_steps = 50000

    [arena]
    side_length = 30.0

    [[classes]]
    name = "slow"
    count = 50
    k = 14

Adding a ``[sweep]`` table turns it into a parameter grid::

    [sweep]
    replicates = 5

    [[sweep.axes]]
    path = "k"                    # every class's k
    values = [2, 6, 10, 14, 18]

    [[sweep.axes]]
    paths = ["classes.fast.count", "classes.slow.count"]
    values = [[0, 50], [10, 40]]  # coupled: one value per path

Axis paths use the dotted layout of :meth:`SimConfig.to_dict`, with classes
addressed by name (``classes.<name>.<field>``).  The short names ``k``,
``t_mem`` and ``v_max`` expand to that field of every class; ``L``, ``J`` and
``T`` stand for ``arena.side_length``, ``target_count`` and ``n_steps``.
"""

from __future__ import annotations

import copy
import itertools
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, Union

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..core import ConfigError, SimConfig

SCALAR_ALIASES = {"L": "arena.side_length", "J": "target_count", "T": "n_steps"}
CLASS_ALIASES = ("k", "t_mem", "v_max", "count")


def set_path(data: dict[str, Any], path: str, value: Any) -> None:
    """Assign ``value`` at dotted ``path`` inside a ``SimConfig.to_dict()`` tree."""
    parts = path.split(".")
    if parts[0] == "classes":
        if len(parts) != 3:
            raise ConfigError(f"{path}: class paths look like classes.<name>.<field>")
        for c in data["classes"]:
            if c["name"] == parts[1]:
                if parts[2] not in c:
                    raise ConfigError(f"{path}: unknown class field {parts[2]!r}")
                c[parts[2]] = value
                return
        raise ConfigError(f"{path}: no class named {parts[1]!r}")
    node = data
    for p in parts[:-1]:
        if not isinstance(node.get(p), dict):
            raise ConfigError(f"{path}: unknown section {p!r}")
        node = node[p]
    if parts[-1] not in node:
        raise ConfigError(f"{path}: unknown key {parts[-1]!r}")
    node[parts[-1]] = value


def flatten(config: SimConfig) -> dict[str, Any]:
    """Every parameter of ``config`` under its dotted path, plus N and density."""
    out: dict[str, Any] = {}
    for key, val in config.to_dict().items():
        if key == "classes":
            for c in val:
                for f, v in c.items():
                    if f != "name":
                        out[f"classes.{c['name']}.{f}"] = v
        elif isinstance(val, dict):
            for f, v in val.items():
                out[f"{key}.{f}"] = v
        else:
            out[key] = val
    out["N"] = config.n_agents
    out["density"] = config.density
    return out


@dataclass(frozen=True)
class Axis:
    """One sweep dimension; with several paths each value sets all of them."""

    paths: tuple[str, ...]
    values: tuple[Any, ...]

    @property
    def name(self) -> str:
        return "+".join(self.paths)

    def assignments(self, value) -> list[tuple[str, Any]]:
        if len(self.paths) == 1:
            return [(self.paths[0], value)]
        if isinstance(value, (list, tuple)):
            if len(value) != len(self.paths):
                raise ConfigError(f"sweep axis {self.name}: value {value!r} needs {len(self.paths)} entries")
            return list(zip(self.paths, value))
        return [(p, value) for p in self.paths]


def expand_alias(path: str, base: SimConfig) -> tuple[str, ...]:
    if path in SCALAR_ALIASES:
        return (SCALAR_ALIASES[path],)
    if path in CLASS_ALIASES:
        return tuple(f"classes.{c.name}.{path}" for c in base.classes)
    return (path,)


def make_axis(base: SimConfig, paths, values) -> Axis:
    """Axis from user-facing paths (aliases allowed) and a value list."""
    if isinstance(paths, str):
        paths = [paths]
    full = tuple(p for path in paths for p in expand_alias(path, base))
    if not full:
        raise ConfigError("sweep axis needs at least one path")
    values = tuple(tuple(v) if isinstance(v, list) else v for v in values)
    if not values:
        raise ConfigError(f"sweep axis {'+'.join(full)} has no values")
    return Axis(full, values)


@dataclass(frozen=True)
class SweepSpec:
    """Cartesian grid over ``axes``, each point run ``replicates`` times.

    Replicate ``r`` of every grid point uses seed ``base.seed + r``.
    """

    base: SimConfig
    axes: tuple[Axis, ...] = ()
    replicates: int = 5
    name: str = "sweep"
    _points: tuple = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.replicates < 1:
            raise ConfigError(f"sweep.replicates must be >= 1, got {self.replicates}")
        if self.base.seed + self.replicates - 1 >= 2**64:
            raise ConfigError("sweep seeds would overflow 64 bits")
        object.__setattr__(self, "axes", tuple(self.axes))
        object.__setattr__(self, "_points", tuple(self._build_points()))

    def _build_points(self) -> Iterator[SimConfig]:
        for combo in itertools.product(*(a.values for a in self.axes)):
            data = copy.deepcopy(self.base.to_dict())
            for axis, value in zip(self.axes, combo):
                for path, v in axis.assignments(value):
                    set_path(data, path, v)
            try:
                yield SimConfig.from_dict(data)
            except ConfigError as e:
                where = ", ".join(f"{a.name}={v!r}" for a, v in zip(self.axes, combo))
                raise ConfigError(f"grid point ({where}): {e}") from None

    @property
    def points(self) -> tuple[SimConfig, ...]:
        """Grid point configs (base seed), in enumeration order."""
        return self._points

    @property
    def axis_columns(self) -> tuple[str, ...]:
        return tuple(p for a in self.axes for p in a.paths)

    def __len__(self) -> int:
        return len(self._points) * self.replicates

    def runs(self) -> Iterator[tuple[int, int, SimConfig]]:
        """``(point, replicate, config)`` for every run, sorted by point then replicate."""
        for i, cfg in enumerate(self._points):
            for r in range(self.replicates):
                yield i, r, cfg.with_updates(seed=cfg.seed + r)

    def with_base(self, **changes) -> "SweepSpec":
        return SweepSpec(self.base.with_updates(**changes), self.axes, self.replicates, self.name)


def parse_config(data: dict[str, Any], name: str = "config") -> Union[SimConfig, SweepSpec]:
    data = dict(data)
    sweep = data.pop("sweep", None)
    base = SimConfig.from_dict(data)
    if sweep is None:
        return base
    if not isinstance(sweep, dict):
        raise ConfigError("sweep must be a table")
    unknown = sorted(set(sweep) - {"replicates", "axes", "name"})
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join('sweep.' + u for u in unknown)}")
    axes = []
    for i, ax in enumerate(sweep.get("axes", [])):
        label = f"sweep.axes[{i}]"
        if not isinstance(ax, dict):
            raise ConfigError(f"{label} must be a table")
        bad = sorted(set(ax) - {"path", "paths", "values"})
        if bad:
            raise ConfigError(f"unknown key(s): {', '.join(f'{label}.{b}' for b in bad)}")
        if ("path" in ax) == ("paths" in ax):
            raise ConfigError(f"{label} needs exactly one of 'path' or 'paths'")
        if not isinstance(ax.get("values"), list):
            raise ConfigError(f"{label}.values must be a list")
        axes.append(make_axis(base, ax.get("path", ax.get("paths")), ax["values"]))
    reps = sweep.get("replicates", 5)
    if isinstance(reps, bool) or not isinstance(reps, int):
        raise ConfigError(f"sweep.replicates must be an integer, got {reps!r}")
    return SweepSpec(base, tuple(axes), reps, str(sweep.get("name", name)))


def load_config(path) -> Union[SimConfig, SweepSpec]:
    """Read a TOML file; returns a :class:`SweepSpec` when it has a ``[sweep]`` table."""
    path = Path(path)
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from None
    try:
        return parse_config(data, name=path.stem)
    except ConfigError as e:
        raise ConfigError(f"{path}: {e}") from None
