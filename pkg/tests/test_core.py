import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hetswarm import (
    AgentClass,
    ArenaConfig,
    ConfigError,
    CorruptedStateError,
    SimConfig,
    clamp_to_arena,
    normalize_to_speed,
)
from hetswarm.core import FAST, SLOW, StrategyParams, TargetParams, counter_uniform

finite = st.floats(-1e6, 1e6, allow_nan=False)


@pytest.mark.parametrize(
    "v, m, expected",
    [((3, 4), 0.1, (0.06, 0.08)), ((1, 0), 0.26, (0.26, 0.0)), ((0, 0), 0.1, (0.0, 0.0))],
)
def test_normalize_examples(v, m, expected):
    np.testing.assert_allclose(normalize_to_speed(v, m), expected, rtol=0, atol=1e-15)


@pytest.mark.parametrize("bad", [(math.nan, 0.0), (0.0, math.inf)])
def test_normalize_rejects_non_finite(bad):
    with pytest.raises(CorruptedStateError):
        normalize_to_speed(bad, 0.1)


def test_normalize_rejects_non_positive_speed():
    with pytest.raises(ValueError):
        normalize_to_speed((1, 0), 0.0)


@given(finite, finite, st.floats(1e-3, 10))
def test_normalize_magnitude(x, y, m):
    out = normalize_to_speed((x, y), m)
    if x == 0 and y == 0:
        assert tuple(out) == (0.0, 0.0)
    else:
        assert math.hypot(*out) == pytest.approx(m, rel=1e-12)


@pytest.mark.parametrize(
    "p, expected", [((-1, 5), (0, 5)), ((31, 31), (30, 30)), ((15, 15), (15, 15))]
)
def test_clamp_examples(p, expected):
    assert tuple(clamp_to_arena(p, ArenaConfig(30.0))) == expected


@given(finite, finite, st.floats(4, 445))
def test_clamp_idempotent_and_interior_identity(x, y, side):
    arena = ArenaConfig(side)
    once = clamp_to_arena((x, y), arena)
    assert np.all((0 <= once) & (once <= side))
    assert np.array_equal(clamp_to_arena(once, arena), once)
    if 0 <= x <= side and 0 <= y <= side:
        assert tuple(once) == (x, y)


def test_arena_range_warning():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ArenaConfig(4.0)
        ArenaConfig(445.0)
    with pytest.warns(UserWarning):
        ArenaConfig(2.0)
    with pytest.raises(ConfigError):
        ArenaConfig(0.0)


def test_defaults_match_published_values():
    cfg = SimConfig()
    assert cfg.arena.side_length == 30.0
    assert cfg.n_agents == 50 and cfg.target_count == 1
    assert (SLOW.v_max, FAST.v_max) == (0.1, 0.26)
    assert (cfg.strategy.omega, cfg.strategy.c) == (1.0, 0.5)
    assert (cfg.target.v_max, cfg.target.rho) == (0.3, 1.0)
    assert (cfg.classes[0].k, cfg.classes[0].t_mem) == (12, 20)
    assert cfg.n_steps == 50_000


@pytest.mark.parametrize(
    "changes, key",
    [
        (dict(classes=(AgentClass("slow", 50, 0.1, k=50),)), "k in [1, N-1]"),
        (dict(classes=(AgentClass("slow", 1, 0.1, k=1),)), "N >= 2"),
        (dict(classes=(AgentClass("slow", 50, 0.0),)), "classes.slow.v_max"),
        (dict(classes=(AgentClass("slow", 50, 0.1, t_mem=-1),)), "classes.slow.t_mem"),
        (dict(target=TargetParams(rho=0.0)), "target.rho"),
        (dict(strategy=StrategyParams(gamma_track=2.0)), "strategy.gamma_track"),
        (dict(strategy=StrategyParams(share_hops=-1)), "strategy.share_hops"),
        (dict(n_steps=0), "n_steps"),
        (dict(seed=-1), "seed"),
        (dict(seed=2**64), "seed"),
        (dict(boundary="wrap"), "boundary"),
        (dict(placement="hex"), "placement"),
        (dict(burn_in=50_000), "burn_in"),
    ],
)
def test_invalid_configs_name_the_key(changes, key):
    with pytest.raises(ConfigError, match=key.replace("[", r"\[").replace("]", r"\]")):
        SimConfig(**changes)


def test_zero_count_class_skips_degree_check():
    cfg = SimConfig(classes=(AgentClass("slow", 50, 0.1, k=49), AgentClass("fast", 0, 0.26, k=49)))
    assert cfg.n_agents == 50


def test_targets_slower_than_agents_are_accepted():
    SimConfig(target=TargetParams(v_max=0.05))


def test_dict_round_trip_and_unknown_keys():
    cfg = SimConfig(classes=(AgentClass("slow", 35, 0.1, k=14), AgentClass("fast", 15, 0.26, k=6)), seed=9)
    assert SimConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ConfigError, match="arena.sides"):
        SimConfig.from_dict({"arena": {"sides": 3}})
    with pytest.raises(ConfigError, match="n_step"):
        SimConfig.from_dict({"n_step": 3})
    with pytest.raises(ConfigError, match="classes\\[slow\\].k"):
        SimConfig.from_dict({"classes": [{"name": "slow", "count": 50, "k": "x"}]})


def test_fast_class_picks_up_fast_defaults():
    cfg = SimConfig.from_dict({"classes": [{"name": "slow", "count": 40}, {"name": "fast", "count": 10}]})
    assert cfg.class_of("fast").v_max == 0.26
    assert cfg.class_of("slow").v_max == 0.1


def test_agent_arrays_group_by_class():
    cfg = SimConfig(classes=(AgentClass("a", 2, 0.1, k=1, t_mem=3), AgentClass("b", 3, 0.2, k=4, t_mem=7)))
    arr = cfg.agent_arrays()
    assert arr["class_index"].tolist() == [0, 0, 1, 1, 1]
    assert arr["k"].tolist() == [1, 1, 4, 4, 4]
    assert arr["t_mem"].tolist() == [3, 3, 7, 7, 7]
    assert cfg.density == pytest.approx(5 / 900)


@given(st.integers(0, 2**64 - 1), st.integers(0, 10), st.integers(0, 10**6), st.integers(0, 1000))
def test_counter_uniform_range_and_purity(seed, stream, step, index):
    u = counter_uniform(np.uint64(seed), stream, step, index, 0)
    assert 0.0 <= u < 1.0
    assert u == counter_uniform(np.uint64(seed), stream, step, index, 0)


def test_counter_streams_look_uniform():
    u = np.array([counter_uniform(np.uint64(7), 1, t, i, 0) for t in range(100) for i in range(50)])
    assert abs(u.mean() - 0.5) < 0.02
    assert abs(u.var() - 1 / 12) < 0.01
    assert len(np.unique(u)) == u.size
