"""Seeded run orchestration and tracking metrics.

Each step reads the time-``t`` snapshot and writes a second buffer:

1. rebuild the kNN topology from agent positions,
2. every agent merges its own detections and what its out-neighbours share,
   picks a point of attraction and moves,
3. every target moves (seeing agent positions at ``t``),
4. buffers swap; coverage and engagement are sampled on the new state.

Metrics for step ``s = t + 1`` therefore describe positions after the move.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from typing import IO, Optional

import numpy as np
from numba import njit

from .core import ConfigError, CorruptedStateError, SimConfig
from .network import initial_order, sort_neighbors
from .strategy import merge_memory, purge_memory, step_agent
from .target import WAYPOINT, Mode, step_target


def coverage(target_position, agent_positions, rho: float) -> int:
    """1 if any agent lies within ``rho`` (inclusive) of the target, else 0."""
    a = np.asarray(agent_positions, dtype=np.float64).reshape(-1, 2)
    d2 = np.sum((a - np.asarray(target_position, dtype=np.float64)) ** 2, axis=1)
    return int(np.any(d2 <= rho * rho))


def tracking_performance(coverage_matrix) -> float:
    """Mean of a (steps x targets) 0/1 coverage matrix."""
    c = np.asarray(coverage_matrix, dtype=np.float64)
    return float(c.mean()) if c.size else 0.0


def engagement_ratio(tracking_matrix) -> float:
    """Mean of a (steps x agents) 0/1 tracking-state matrix."""
    s = np.asarray(tracking_matrix, dtype=np.float64)
    return float(s.mean()) if s.size else 0.0


@njit(cache=True)
def _run_block(
    pos, vel, order, kv, vmax, tmem, mem_t, mem_p, mem_h, tracking,
    tpos, twp, tmode, tstreak, trem, thead,
    t0, t1, seed, omega, c, a_r, d, gamma, share_hops, side, reflect,
    tv, rho, ta_r, td, t_limit, t_evade, tol, redraw,
    burn_in, cov_counts, engaged, series, series_every,
):
    """Advance the state in place from step ``t0`` to ``t1``.

    Returns -1 on success or the step at which the state went non-finite.
    ``engaged[0]`` accumulates the agent-steps spent tracking.
    """
    n = pos.shape[0]
    n_t = tpos.shape[0]
    dm = np.empty((n, n))
    new_pos = np.empty_like(pos)
    new_vel = np.empty_like(vel)
    new_mt = np.empty_like(mem_t)
    new_mp = np.empty_like(mem_p)
    new_mh = np.empty_like(mem_h)
    new_tpos = np.empty_like(tpos)
    new_twp = np.empty_like(twp)
    new_thead = np.empty_like(thead)
    new_tmode = np.empty_like(tmode)
    new_tstreak = np.empty_like(tstreak)
    new_trem = np.empty_like(trem)
    rho2 = rho * rho
    shares = np.empty(n, dtype=np.bool_)
    for t in range(t0, t1):
        sort_neighbors(pos, order, dm)
        # neighbours with nothing to share are skipped in the merge below
        for i in range(n):
            shares[i] = False
            for m in range(n_t):
                if mem_t[i, m] >= 0 and mem_h[i, m] < share_hops:
                    shares[i] = True
                    break
        for i in range(n):
            for m in range(n_t):
                new_mt[i, m] = mem_t[i, m]
                new_mp[i, m, 0] = mem_p[i, m, 0]
                new_mp[i, m, 1] = mem_p[i, m, 1]
                new_mh[i, m] = mem_h[i, m]
                dx = tpos[m, 0] - pos[i, 0]
                dy = tpos[m, 1] - pos[i, 1]
                if dx * dx + dy * dy <= rho2:
                    new_mt[i, m] = t
                    new_mp[i, m, 0] = tpos[m, 0]
                    new_mp[i, m, 1] = tpos[m, 1]
                    new_mh[i, m] = 0
            for q in range(kv[i]):
                j = order[i, q]
                if not shares[j]:
                    continue
                merge_memory(new_mt, new_mp, new_mh, i, mem_t, mem_p, mem_h, j, share_hops)
            purge_memory(new_mt, i, t, tmem[i])
            trk, px, py, vx, vy = step_agent(
                i, pos, vel, order, kv[i], new_mt, new_mp, t, seed,
                vmax[i], omega, c, a_r, d, gamma, side, reflect,
            )
            tracking[i] = trk
            new_pos[i, 0] = px
            new_pos[i, 1] = py
            new_vel[i, 0] = vx
            new_vel[i, 1] = vy
        for m in range(n_t):
            px, py, wx, wy, md, st, rm, hx, hy = step_target(
                m, tpos, twp, tmode, tstreak, trem, thead, pos,
                tv, rho, ta_r, td, t_limit, t_evade, tol, redraw, side, seed, t,
            )
            new_tpos[m, 0] = px
            new_tpos[m, 1] = py
            new_twp[m, 0] = wx
            new_twp[m, 1] = wy
            new_tmode[m] = md
            new_tstreak[m] = st
            new_trem[m] = rm
            new_thead[m, 0] = hx
            new_thead[m, 1] = hy
        ok = True
        for i in range(n):
            if not (math.isfinite(new_pos[i, 0]) and math.isfinite(new_pos[i, 1])):
                ok = False
        for m in range(n_t):
            if not (math.isfinite(new_tpos[m, 0]) and math.isfinite(new_tpos[m, 1])):
                ok = False
        if not ok:
            return t
        pos[:] = new_pos
        vel[:] = new_vel
        mem_t[:] = new_mt
        mem_p[:] = new_mp
        mem_h[:] = new_mh
        tpos[:] = new_tpos
        twp[:] = new_twp
        thead[:] = new_thead
        tmode[:] = new_tmode
        tstreak[:] = new_tstreak
        trem[:] = new_trem

        s = t + 1
        covered = 0
        for m in range(n_t):
            hit = 0
            for i in range(n):
                dx = tpos[m, 0] - pos[i, 0]
                dy = tpos[m, 1] - pos[i, 1]
                if dx * dx + dy * dy <= rho2:
                    hit = 1
                    break
            covered += hit
            if s > burn_in:
                cov_counts[m] += hit
        n_eng = 0
        for i in range(n):
            if tracking[i]:
                n_eng += 1
        if s > burn_in:
            engaged[0] += n_eng
        if s % series_every == 0:
            r = s // series_every - 1
            series[r, 0] = s
            series[r, 1] = covered
            series[r, 2] = n_eng
    return -1


@dataclass
class SwarmState:
    """Mutable array state of a run (agents then targets)."""

    pos: np.ndarray
    vel: np.ndarray
    order: np.ndarray
    mem_t: np.ndarray
    mem_p: np.ndarray
    mem_h: np.ndarray
    tracking: np.ndarray
    tpos: np.ndarray
    twp: np.ndarray
    tmode: np.ndarray
    tstreak: np.ndarray
    trem: np.ndarray
    thead: np.ndarray
    t: int = 0

    def snapshot(self) -> dict:
        return {
            "step": self.t,
            "agent_positions": self.pos.copy(),
            "agent_velocities": self.vel.copy(),
            "agent_tracking": self.tracking.copy(),
            "target_positions": self.tpos.copy(),
            "target_modes": [Mode(int(m)).name for m in self.tmode],
        }


def _init_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))


def initial_state(config: SimConfig) -> SwarmState:
    """Agents at random (or grid) positions with random headings; targets spaced >= 2 rho."""
    rng = _init_rng(config.seed)
    arrays = config.agent_arrays()
    n = config.n_agents
    j = config.target_count
    side = config.arena.side_length
    rho = config.target.rho
    if config.placement == "grid":
        cols = math.ceil(math.sqrt(n))
        cell = side / cols
        ij = np.array([(i % cols, i // cols) for i in range(n)], dtype=np.float64)
        pos = (ij + 0.5) * cell
    else:
        pos = rng.uniform(0.0, side, size=(n, 2))
    heading = rng.uniform(0.0, 2 * math.pi, size=n)
    vel = arrays["v_max"][:, None] * np.column_stack([np.cos(heading), np.sin(heading)])

    tpos = np.empty((j, 2))
    placed = 0
    for _ in range(100_000):
        if placed == j:
            break
        cand = rng.uniform(0.0, side, size=2)
        if placed == 0 or np.min(np.sum((tpos[:placed] - cand) ** 2, axis=1)) >= (2 * rho) ** 2:
            tpos[placed] = cand
            placed += 1
    if placed < j:
        raise ConfigError(f"cannot place {j} targets {2 * rho} apart in an arena of side {side}")
    twp = rng.uniform(0.0, side, size=(j, 2))
    return SwarmState(
        pos=pos,
        vel=vel,
        order=initial_order(n),
        mem_t=np.full((n, j), -1, dtype=np.int64),
        mem_p=np.zeros((n, j, 2)),
        mem_h=np.zeros((n, j), dtype=np.int64),
        tracking=np.zeros(n, dtype=np.bool_),
        tpos=tpos,
        twp=twp,
        tmode=np.full(j, WAYPOINT, dtype=np.int64),
        tstreak=np.zeros(j, dtype=np.int64),
        trem=np.zeros(j, dtype=np.int64),
        thead=np.tile([1.0, 0.0], (j, 1)),
    )


@dataclass
class Accumulators:
    cov_counts: np.ndarray
    engaged: np.ndarray
    series: np.ndarray


def advance(state: SwarmState, config: SimConfig, steps: int, acc: Accumulators) -> None:
    """Run ``steps`` steps of ``config`` on ``state`` in place."""
    arrays = config.agent_arrays()
    s, tp = config.strategy, config.target
    bad = _run_block(
        state.pos, state.vel, state.order, arrays["k"], arrays["v_max"], arrays["t_mem"],
        state.mem_t, state.mem_p, state.mem_h, state.tracking,
        state.tpos, state.twp, state.tmode, state.tstreak, state.trem, state.thead,
        state.t, state.t + steps, np.uint64(config.seed),
        s.omega, s.c, s.a_R_agent, s.d_agent, s.gamma_track, s.share_hops,
        config.arena.side_length, config.boundary == "reflect",
        tp.v_max, tp.rho, tp.a_R, tp.d, tp.t_limit, tp.t_evade, tp.waypoint_tolerance, tp.redraw_waypoint,
        config.burn_in, acc.cov_counts, acc.engaged, acc.series, config.series_every,
    )
    if bad >= 0:
        raise CorruptedStateError(f"non-finite state produced at step {bad}")
    state.t += steps


@dataclass(frozen=True, eq=False)
class RunResult:
    xi: float
    theta: float
    per_target_xi: tuple[float, ...]
    xi_defined: bool
    series: np.ndarray = field(repr=False)  # rows of (step, covered targets, engaged agents)
    final: dict = field(repr=False)
    config: SimConfig = field(repr=False)
    wall_time_s: float = field(default=0.0, compare=False)

    @property
    def seed(self) -> int:
        return self.config.seed

    def digest(self) -> str:
        """SHA-256 over every simulated quantity (wall time excluded)."""
        h = hashlib.sha256()
        h.update(np.array([self.xi, self.theta, *self.per_target_xi]).tobytes())
        h.update(np.ascontiguousarray(self.series).tobytes())
        for key in ("agent_positions", "agent_velocities", "agent_tracking", "target_positions"):
            h.update(np.ascontiguousarray(self.final[key]).tobytes())
        h.update(json.dumps(self.final["target_modes"]).encode())
        h.update(json.dumps(self.config.to_dict(), sort_keys=True).encode())
        return h.hexdigest()

    def __eq__(self, other):
        if not isinstance(other, RunResult):
            return NotImplemented
        return self.digest() == other.digest()

    def __hash__(self):
        return hash(self.digest())

    def to_dict(self) -> dict:
        return {
            "xi": self.xi,
            "theta": self.theta,
            "per_target_xi": list(self.per_target_xi),
            "xi_defined": self.xi_defined,
            "seed": self.seed,
            "config": self.config.to_dict(),
        }


def frame_record(state: SwarmState) -> dict:
    return {
        "step": state.t,
        "agents": [[float(x), float(y), int(s)] for (x, y), s in zip(state.pos, state.tracking)],
        "targets": [[float(x), float(y), Mode(int(m)).name] for (x, y), m in zip(state.tpos, state.tmode)],
    }


def run_simulation(
    config: SimConfig,
    frames: Optional[IO[str]] = None,
    frame_every: int = 1,
) -> RunResult:
    """Execute one seeded run; identical configs give bit-identical results.

    With ``frames`` the state is written as one JSON object per line every
    ``frame_every`` steps (step 0 included).
    """
    config.validate()
    started = time.perf_counter()
    state = initial_state(config)
    n_rows = config.n_steps // config.series_every
    acc = Accumulators(
        cov_counts=np.zeros(config.target_count, dtype=np.int64),
        engaged=np.zeros(1, dtype=np.int64),
        series=np.zeros((n_rows, 3), dtype=np.int64),
    )
    if frames is None:
        advance(state, config, config.n_steps, acc)
    else:
        frames.write(json.dumps(frame_record(state)) + "\n")
        while state.t < config.n_steps:
            advance(state, config, min(frame_every, config.n_steps - state.t), acc)
            frames.write(json.dumps(frame_record(state)) + "\n")

    steps = config.n_steps - config.burn_in
    j = config.target_count
    per_target = tuple(float(c) / steps for c in acc.cov_counts)
    xi = float(acc.cov_counts.sum()) / (steps * j) if j else 0.0
    theta = float(acc.engaged[0]) / (steps * config.n_agents)
    return RunResult(
        xi=xi,
        theta=theta,
        per_target_xi=per_target,
        xi_defined=j > 0,
        series=acc.series,
        final=state.snapshot(),
        config=config,
        wall_time_s=time.perf_counter() - started,
    )
