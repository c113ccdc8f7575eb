"""Per-agent search-and-track behaviour.

Memory layout used by the kernels: for one agent, ``mem_t[m]`` is the step
at which target ``m`` was last known to be at ``mem_p[m]`` (``-1`` = no
entry) and ``mem_h[m]`` counts the relays the entry went through (0 for the
agent's own sighting).  Two entries for the same target and timestamp always
agree on the position, so merging is "larger timestamp wins", with fewer
hops breaking ties.  An entry is passed on only while its hop count is below
``share_hops``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from numba import njit

from .core import (
    STREAM_AGENT_EPS,
    STREAM_AGENT_SINGULAR,
    AgentClass,
    ArenaConfig,
    CorruptedStateError,
    StrategyParams,
    _bound,
    _inverse_power,
    _normalize,
    counter_uniform,
)

# --------------------------------------------------------------------------
# kernels
# --------------------------------------------------------------------------


@njit(cache=True, inline="always")
def merge_memory(dst_t, dst_p, dst_h, i, src_t, src_p, src_h, j, share_hops):
    """Fold the shareable part of row ``j`` of a source memory into row ``i``."""
    for m in range(dst_t.shape[1]):
        ts = src_t[j, m]
        if ts < 0 or src_h[j, m] >= share_hops:
            continue
        h = src_h[j, m] + 1
        if ts > dst_t[i, m] or (ts == dst_t[i, m] and h < dst_h[i, m]):
            dst_t[i, m] = ts
            dst_h[i, m] = h
            dst_p[i, m, 0] = src_p[j, m, 0]
            dst_p[i, m, 1] = src_p[j, m, 1]


@njit(cache=True, inline="always")
def purge_memory(mem_t, i, t, t_mem):
    """Drop row ``i`` entries older than ``t_mem``; returns the tracking flag."""
    tracking = False
    for m in range(mem_t.shape[1]):
        if mem_t[i, m] >= 0:
            if t - mem_t[i, m] > t_mem:
                mem_t[i, m] = -1
            else:
                tracking = True
    return tracking


@njit(cache=True, inline="always")
def nearest_observation(mem_t, mem_p, i, x, y):
    """Index of the remembered target closest to ``(x, y)`` in row ``i``, or -1.

    Ties: larger timestamp first, then lower target index.
    """
    best = -1
    best_d = 0.0
    for m in range(mem_t.shape[1]):
        if mem_t[i, m] < 0:
            continue
        dx = mem_p[i, m, 0] - x
        dy = mem_p[i, m, 1] - y
        d = dx * dx + dy * dy
        if best < 0 or d < best_d or (d == best_d and mem_t[i, m] > mem_t[i, best]):
            best = m
            best_d = d
    return best


@njit(cache=True, inline="always")
def attraction(vx, vy, px, py, has_point, tx, ty, eps, omega, c):
    ax = omega * vx
    ay = omega * vy
    if has_point:
        ax += c * eps * (tx - px)
        ay += c * eps * (ty - py)
    return ax, ay


@njit(cache=True, inline="always")
def repulsion(pos, i, nbrs, count, a_r, d, gain, seed, stream, t):
    """Inverse-power repulsion of ``pos[i]`` from ``pos[nbrs[i, :count]]``.

    Each term is ``(a_r / r)**d`` along the unit vector pointing away from the
    neighbour.  A coincident neighbour contributes a unit push in a direction
    drawn from ``(seed, stream, t, i, j)``.
    """
    rx = 0.0
    ry = 0.0
    xi = pos[i, 0]
    yi = pos[i, 1]
    for q in range(count):
        j = nbrs[i, q]
        dx = pos[j, 0] - xi
        dy = pos[j, 1] - yi
        r = math.hypot(dx, dy)
        if r == 0.0:
            ang = 2.0 * math.pi * counter_uniform(seed, stream, t, i, j)
            rx += math.cos(ang)
            ry += math.sin(ang)
        else:
            w = _inverse_power(a_r, r, d)
            rx -= w * dx
            ry -= w * dy
    return gain * rx, gain * ry


@njit(cache=True)
def step_agent(
    i, pos, vel, nbrs, k_i, mem_t, mem_p, t, seed,
    v_max, omega, c, a_r, d, gamma_track, side, reflect,
):
    """Velocity and position of agent ``i`` given its already updated memory row.

    ``nbrs[i, :k_i]`` are its out-neighbours; ``mem_t``/``mem_p`` hold the
    post-update memories.

    Returns ``(tracking, px, py, vx, vy)``; ``vx, vy`` is the normalised
    velocity that becomes the inertia term of the next step.
    """
    px = pos[i, 0]
    py = pos[i, 1]
    m = nearest_observation(mem_t, mem_p, i, px, py)
    tracking = m >= 0
    tx = 0.0
    ty = 0.0
    if tracking:
        tx = mem_p[i, m, 0]
        ty = mem_p[i, m, 1]
    eps = counter_uniform(seed, STREAM_AGENT_EPS, t, i, 0)
    ax, ay = attraction(vel[i, 0], vel[i, 1], px, py, tracking, tx, ty, eps, omega, c)
    gain = gamma_track if tracking else 1.0
    rx, ry = repulsion(pos, i, nbrs, k_i, a_r, d, gain, seed, STREAM_AGENT_SINGULAR, t)
    vx, vy = _normalize(ax + rx, ay + ry, v_max)
    nx, ny, vx, vy = _bound(px + vx, py + vy, vx, vy, side, reflect)
    return tracking, nx, ny, vx, vy


# --------------------------------------------------------------------------
# object-level API
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Observation:
    target_index: int
    position: tuple[float, float]
    timestamp: int
    hops: int = 0  # relays between the sighting agent and the holder


@dataclass(frozen=True)
class AgentState:
    class_index: int
    position: tuple[float, float]
    velocity: tuple[float, float] = (0.0, 0.0)
    memory: dict[int, Observation] = field(default_factory=dict)
    tracking: bool = False


def _memory_arrays(memory, n_targets: int):
    """One-row memory arrays, shapes (1, J), (1, J, 2) and (1, J)."""
    mem_t = np.full((1, n_targets), -1, dtype=np.int64)
    mem_p = np.zeros((1, n_targets, 2))
    mem_h = np.zeros((1, n_targets), dtype=np.int64)
    for obs in memory:
        mem_t[0, obs.target_index] = obs.timestamp
        mem_p[0, obs.target_index] = obs.position
        mem_h[0, obs.target_index] = obs.hops
    return mem_t, mem_p, mem_h


def _memory_dict(mem_t, mem_p, mem_h) -> dict[int, Observation]:
    return {
        m: Observation(m, (float(mem_p[0, m, 0]), float(mem_p[0, m, 1])), int(mem_t[0, m]), int(mem_h[0, m]))
        for m in range(mem_t.shape[1])
        if mem_t[0, m] >= 0
    }


def _target_span(*groups) -> int:
    return 1 + max((o.target_index for g in groups for o in g), default=-1)


def update_memory(
    agent: AgentState,
    own_detections: Sequence[Observation],
    neighbor_memories: Sequence[Observation],
    t: int,
    t_mem: int,
) -> AgentState:
    """Merge fresh and shared observations, keep the newest per target, expire old ones.

    ``neighbor_memories`` are taken as received, i.e. with their hop counts
    already incremented (see :func:`shared_observations`).
    """
    for obs in (*own_detections, *neighbor_memories):
        if obs.timestamp > t:
            raise ValueError(f"observation of target {obs.target_index} is from the future")
    n = _target_span(agent.memory.values(), own_detections, neighbor_memories)
    mem_t, mem_p, mem_h = _memory_arrays(agent.memory.values(), n)
    for obs in (*own_detections, *neighbor_memories):
        # the kernel adds the hop itself, so hand it the sender's view
        src_t, src_p, src_h = _memory_arrays([replace(obs, hops=max(obs.hops - 1, -1))], n)
        merge_memory(mem_t, mem_p, mem_h, 0, src_t, src_p, src_h, 0, np.iinfo(np.int64).max)
    tracking = purge_memory(mem_t, 0, t, t_mem)
    return replace(agent, memory=_memory_dict(mem_t, mem_p, mem_h), tracking=bool(tracking))


def select_attraction_target(agent: AgentState) -> Optional[int]:
    n = _target_span(agent.memory.values())
    mem_t, mem_p, _ = _memory_arrays(agent.memory.values(), n)
    m = nearest_observation(mem_t, mem_p, 0, *map(float, agent.position))
    return None if m < 0 else int(m)


def select_attraction_point(agent: AgentState) -> Optional[np.ndarray]:
    m = select_attraction_target(agent)
    return None if m is None else np.array(agent.memory[m].position, dtype=float)


def attraction_velocity(agent: AgentState, point, eps: float, params: StrategyParams = StrategyParams()) -> np.ndarray:
    has = point is not None
    tx, ty = (float(point[0]), float(point[1])) if has else (0.0, 0.0)
    return np.array(attraction(*map(float, agent.velocity), *map(float, agent.position), has, tx, ty,
                               float(eps), params.omega, params.c))


def repulsion_velocity(
    agent: AgentState,
    neighbor_positions,
    params: StrategyParams = StrategyParams(),
    tracking: bool = False,
    *,
    seed: int = 0,
    t: int = 0,
) -> np.ndarray:
    nb = np.asarray(neighbor_positions, dtype=np.float64).reshape(-1, 2)
    pos = np.vstack([np.asarray(agent.position, dtype=np.float64), nb])
    idx = np.arange(1, len(pos), dtype=np.int64)[None, :]
    gain = params.gamma_track if tracking else 1.0
    return np.array(repulsion(pos, 0, idx, idx.shape[1], params.a_R_agent, params.d_agent, gain,
                              np.uint64(seed), STREAM_AGENT_SINGULAR, t))


def detect(position, target_positions, rho: float, t: int) -> list[Observation]:
    """Observations of every target within ``rho`` of ``position`` at step ``t``."""
    p = np.asarray(position, dtype=np.float64)
    out = []
    for m, q in enumerate(np.asarray(target_positions, dtype=np.float64).reshape(-1, 2)):
        if np.sum((q - p) ** 2) <= rho * rho:
            out.append(Observation(m, (float(q[0]), float(q[1])), t))
    return out


def shared_observations(agent: AgentState, share_hops: int = 2) -> list[Observation]:
    """What a neighbour reading ``agent`` receives: every entry that has been
    relayed fewer than ``share_hops`` times, one hop older."""
    return [replace(o, hops=o.hops + 1) for o in agent.memory.values() if o.hops < share_hops]


def agent_step(
    agent: AgentState,
    neighbors: Sequence[AgentState],
    detections: Sequence[Observation],
    params: StrategyParams,
    agent_class: AgentClass,
    arena: ArenaConfig,
    t: int,
    *,
    seed: int = 0,
    index: int = 0,
    boundary: str = "reflect",
) -> AgentState:
    """One synchronous step of a single agent from the time-``t`` snapshot.

    ``neighbors`` are the agent's topological out-neighbours as they stood at
    time ``t``, in topology order.  ``index`` is the agent's position in the
    swarm and keys its random draws, so the result matches the engine for the
    same ``(seed, t, index)``.
    """
    shared = [o for nb in neighbors for o in shared_observations(nb, params.share_hops)]
    updated = update_memory(agent, detections, shared, t, agent_class.t_mem)
    n = _target_span(updated.memory.values())
    # kernels address agents by row: the agent sits at row ``index``, neighbours after it
    k = len(neighbors)
    rows = index + 1 + k
    pos = np.zeros((rows, 2))
    vel = np.zeros((rows, 2))
    mem_t = np.full((rows, n), -1, dtype=np.int64)
    mem_p = np.zeros((rows, n, 2))
    pos[index] = agent.position
    vel[index] = agent.velocity
    row_t, row_p, _ = _memory_arrays(updated.memory.values(), n)
    mem_t[index] = row_t[0]
    mem_p[index] = row_p[0]
    nbrs = np.zeros((rows, max(k, 1)), dtype=np.int64)
    nbrs[index, :k] = np.arange(index + 1, rows)
    for q, nb in enumerate(neighbors):
        pos[index + 1 + q] = nb.position
    if not np.all(np.isfinite(pos)) or not np.all(np.isfinite(vel)):
        raise CorruptedStateError("non-finite agent state")
    tracking, px, py, vx, vy = step_agent(
        index, pos, vel, nbrs, k, mem_t, mem_p, t, np.uint64(seed),
        agent_class.v_max, params.omega, params.c, params.a_R_agent, params.d_agent,
        params.gamma_track, arena.side_length, boundary == "reflect",
    )
    if not all(map(math.isfinite, (px, py, vx, vy))):
        raise CorruptedStateError(f"agent {index} produced a non-finite state at step {t}")
    return replace(
        updated, position=(px, py), velocity=(vx, vy), tracking=bool(tracking)
    )
