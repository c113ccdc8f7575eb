"""Evasive target dynamics.

A target wanders between uniform random waypoints.  While agents are within
its radius it flees along the summed inverse-power repulsion; after
``t_limit`` consecutive such steps it sprints in a straight line for
``t_evade`` steps, ignoring agents and bouncing off walls.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from numba import njit

from .core import (
    STREAM_TARGET_SINGULAR,
    STREAM_TARGET_WAYPOINT,
    ArenaConfig,
    CorruptedStateError,
    TargetParams,
    _bound,
    _inverse_power,
    _normalize,
    counter_uniform,
)

WAYPOINT = 0
REPEL = 1
SPRINT = 2


class Mode(enum.IntEnum):
    WAYPOINT = WAYPOINT
    REPEL = REPEL
    SPRINT = SPRINT


@njit(cache=True)
def _push(acc_x, acc_y, dx, dy, a_r, d, seed, t, m, key):
    r = math.hypot(dx, dy)
    if r == 0.0:
        ang = 2.0 * math.pi * counter_uniform(seed, STREAM_TARGET_SINGULAR, t, m, key)
        return acc_x + math.cos(ang), acc_y + math.sin(ang)
    w = _inverse_power(a_r, r, d)
    return acc_x - w * dx, acc_y - w * dy


@njit(cache=True)
def step_target(
    m, tpos, twp, tmode, tstreak, trem, thead, apos,
    v_max, rho, a_r, d, t_limit, t_evade, tol, redraw, side, seed, t,
):
    """Transition of target ``m`` from the time-``t`` snapshot.

    Returns ``(px, py, wx, wy, mode, streak, remaining, hx, hy)``.
    """
    px = tpos[m, 0]
    py = tpos[m, 1]
    wx = twp[m, 0]
    wy = twp[m, 1]
    mode = tmode[m]
    streak = tstreak[m]
    rem = trem[m]
    hx = thead[m, 0]
    hy = thead[m, 1]

    if mode == SPRINT:
        nx, ny, hx, hy = _bound(px + v_max * hx, py + v_max * hy, hx, hy, side, True)
        rem -= 1
        if rem <= 0:
            rem = 0
            mode = WAYPOINT
        return nx, ny, wx, wy, mode, streak, rem, hx, hy

    n_agents = apos.shape[0]
    rx = 0.0
    ry = 0.0
    close = 0
    for i in range(n_agents):
        dx = apos[i, 0] - px
        dy = apos[i, 1] - py
        if dx * dx + dy * dy <= rho * rho:
            close += 1
            rx, ry = _push(rx, ry, dx, dy, a_r, d, seed, t, m, i)
    # other targets closer than 2 rho push this one away as well
    sx = 0.0
    sy = 0.0
    for q in range(tpos.shape[0]):
        if q == m:
            continue
        dx = tpos[q, 0] - px
        dy = tpos[q, 1] - py
        if dx * dx + dy * dy <= 4.0 * rho * rho:
            sx, sy = _push(sx, sy, dx, dy, a_r, d, seed, t, m, n_agents + q)

    if close > 0:
        vx, vy = _normalize(rx + sx, ry + sy, v_max)
        if vx == 0.0 and vy == 0.0 and v_max > 0.0:
            # perfectly balanced pursuers: break the symmetry at random
            ang = 2.0 * math.pi * counter_uniform(seed, STREAM_TARGET_SINGULAR, t, m, n_agents + tpos.shape[0])
            vx = v_max * math.cos(ang)
            vy = v_max * math.sin(ang)
        streak += 1
        mode = REPEL
        if streak >= t_limit:
            streak = 0
            if t_evade > 0:
                mode = SPRINT
                rem = t_evade
                hx, hy = _normalize(vx, vy, 1.0)
            else:
                mode = WAYPOINT
        nx, ny, hx, hy = _bound(px + vx, py + vy, hx, hy, side, mode == SPRINT)
        return nx, ny, wx, wy, mode, streak, rem, hx, hy

    streak = 0
    if mode != WAYPOINT and redraw:
        wx = side * counter_uniform(seed, STREAM_TARGET_WAYPOINT, t, m, 2)
        wy = side * counter_uniform(seed, STREAM_TARGET_WAYPOINT, t, m, 3)
    mode = WAYPOINT
    ux, uy = _normalize(wx - px, wy - py, v_max)
    vx, vy = _normalize(ux + sx, uy + sy, v_max)
    nx, ny, _, _ = _bound(px + vx, py + vy, 0.0, 0.0, side, False)
    ex = wx - nx
    ey = wy - ny
    if ex * ex + ey * ey <= tol * tol:
        wx = side * counter_uniform(seed, STREAM_TARGET_WAYPOINT, t, m, 0)
        wy = side * counter_uniform(seed, STREAM_TARGET_WAYPOINT, t, m, 1)
    return nx, ny, wx, wy, mode, streak, rem, hx, hy


@dataclass(frozen=True)
class TargetState:
    position: tuple[float, float]
    waypoint: tuple[float, float]
    mode: Mode = Mode.WAYPOINT
    encounter_streak: int = 0
    sprint_remaining: int = 0
    sprint_heading: tuple[float, float] = (1.0, 0.0)


def target_step(
    target: TargetState,
    agent_positions,
    params: TargetParams,
    arena: ArenaConfig,
    *,
    seed: int = 0,
    t: int = 0,
    index: int = 0,
    others: Sequence[TargetState] = (),
) -> TargetState:
    """Advance one target.  ``others`` are the remaining targets (for spacing).

    Random draws are keyed by ``(seed, t, index)``, matching the engine when
    ``index`` is the target's index and ``others`` are listed in order.
    """
    everyone = list(others[:index]) + [target] + list(others[index:])
    tpos = np.array([s.position for s in everyone], dtype=np.float64)
    twp = np.array([s.waypoint for s in everyone], dtype=np.float64)
    thead = np.array([s.sprint_heading for s in everyone], dtype=np.float64)
    tmode = np.array([int(s.mode) for s in everyone], dtype=np.int64)
    tstreak = np.array([s.encounter_streak for s in everyone], dtype=np.int64)
    trem = np.array([s.sprint_remaining for s in everyone], dtype=np.int64)
    apos = np.asarray(agent_positions, dtype=np.float64).reshape(-1, 2)
    if not (np.all(np.isfinite(tpos)) and np.all(np.isfinite(apos))):
        raise CorruptedStateError("non-finite position in target step")
    px, py, wx, wy, mode, streak, rem, hx, hy = step_target(
        index, tpos, twp, tmode, tstreak, trem, thead, apos,
        params.v_max, params.rho, params.a_R, params.d, params.t_limit, params.t_evade,
        params.waypoint_tolerance, params.redraw_waypoint, arena.side_length, np.uint64(seed), t,
    )
    return replace(
        target,
        position=(px, py),
        waypoint=(wx, wy),
        mode=Mode(mode),
        encounter_streak=int(streak),
        sprint_remaining=int(rem),
        sprint_heading=(hx, hy),
    )
