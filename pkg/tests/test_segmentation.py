import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_plan
from fixtures import THREE_SEGMENT_BREAKPOINTS, THREE_SEGMENT_PLAN, TWO_SEGMENT_PLAN
from xmapf.core import Plan
from xmapf.segmentation import (
    CollidingPlanError,
    Decomposition,
    SegWitness,
    boundary_witnesses,
    greedy_breakpoints,
    greedy_decompose,
    index_with_collision_breaks,
    oracle_min_index,
    segments,
    window_is_disjoint,
)
from xmapf.world import GridWorld


def assert_maximal_windows(paths, bp):
    """Each window is disjoint and would stop being so one step longer."""
    for a, b in zip(bp, bp[1:]):
        assert window_is_disjoint(paths, a, b)
    for b in bp[1:-1]:
        a = max(x for x in bp if x < b)
        assert not window_is_disjoint(paths, a, b + 1)


def test_disjoint_paths_have_index_one():
    d = greedy_decompose([[(0, 0), (1, 0)], [(0, 2), (1, 2), (2, 2)]])
    assert d.breakpoints == (0, 3)
    assert d.index == 1


def test_single_agent_and_empty_plan():
    assert greedy_decompose([[(0, 0), (1, 0), (0, 0)]]).index == 1
    assert greedy_decompose([]).breakpoints == (0, 1)
    assert greedy_decompose(Plan(())).index == 1


def test_three_segment_fixture():
    d = greedy_decompose(THREE_SEGMENT_PLAN)
    assert d.breakpoints == THREE_SEGMENT_BREAKPOINTS
    assert oracle_min_index(THREE_SEGMENT_PLAN) == 3
    assert_maximal_windows(THREE_SEGMENT_PLAN, d.breakpoints)


def test_three_segment_witnesses():
    assert boundary_witnesses(THREE_SEGMENT_PLAN) == [
        SegWitness(1, 1, 0, (2, 2), 3, 2),
        SegWitness(2, 2, 1, (2, 4), 6, 5),
    ]


def test_two_segment_witness():
    d = greedy_decompose(TWO_SEGMENT_PLAN)
    assert d.breakpoints == (0, 3, 5)
    assert boundary_witnesses(TWO_SEGMENT_PLAN, d) == [SegWitness(1, 1, 0, (1, 1), 3, 1)]


def test_witness_needs_two_segments():
    with pytest.raises(ValueError):
        boundary_witnesses([[(0, 0)], [(1, 1)]])


def test_own_revisit_is_fine():
    paths = [[(0, 0), (1, 0), (0, 0), (1, 0)], [(2, 2), (2, 1), (2, 2)]]
    assert greedy_decompose(paths).index == 1


def test_colliding_plan_rejected_but_indexed():
    paths = [[(0, 0), (1, 0), (2, 0)], [(2, 0), (1, 0), (0, 0)]]
    with pytest.raises(CollidingPlanError):
        greedy_decompose(paths)
    # the vertex collision at t=1 sits in a window of its own
    assert greedy_breakpoints(paths) == [0, 1, 2, 3]
    assert index_with_collision_breaks(paths) == 3
    assert oracle_min_index(paths) == 3


def test_decomposition_validation():
    with pytest.raises(ValueError):
        Decomposition((0,))
    with pytest.raises(ValueError):
        Decomposition((1, 3))
    with pytest.raises(ValueError):
        Decomposition((0, 3, 3))
    d = Decomposition((0, 3, 6, 9))
    assert d.windows() == [(0, 3), (3, 6), (6, 9)]
    assert [d.window_of(t) for t in (0, 2, 3, 8, 20)] == [0, 0, 1, 2, 2]


def test_segments_drop_finished_agents():
    d = greedy_decompose(THREE_SEGMENT_PLAN)
    segs = segments(THREE_SEGMENT_PLAN, d)
    assert segs[2][0] == () and segs[2][1] == ()
    assert segs[2][2] == ((2, 4), (1, 4), (0, 4))


def test_oracle_rejects_long_plans():
    with pytest.raises(ValueError):
        oracle_min_index([[(0, 0)] * 40])


def _plan(seed, n=4, length=10, collision_free=True):
    rng = random.Random(seed)
    return random_plan(GridWorld(5, 5), rng, rng.randint(1, n), length, collision_free)


@given(st.integers(0, 10**9))
def test_greedy_is_optimal(seed):
    paths = _plan(seed)
    assert greedy_decompose(paths).index == oracle_min_index(paths)


@given(st.integers(0, 10**9))
def test_greedy_with_collisions_is_optimal(seed):
    paths = _plan(seed, collision_free=False)
    assert index_with_collision_breaks(paths) == oracle_min_index(paths)


@given(st.integers(0, 10**9))
def test_segments_are_disjoint(seed):
    paths = _plan(seed)
    d = greedy_decompose(paths)
    for seg in segments(paths, d):
        owner = {}
        for k, sub in enumerate(seg):
            for v in sub:
                assert owner.setdefault(v, k) == k
    assert_maximal_windows(paths, d.breakpoints)


@given(st.integers(0, 10**9), st.integers(1, 10))
def test_truncation_never_raises_index(seed, t):
    paths = _plan(seed)
    cut = [p[:t] for p in paths]
    assert greedy_decompose(cut).index <= greedy_decompose(paths).index


@given(st.integers(0, 10**9))
def test_witnesses_explain_every_boundary(seed):
    paths = _plan(seed)
    d = greedy_decompose(paths)
    if d.index < 2:
        return
    ws = boundary_witnesses(paths, d)
    assert [w.boundary for w in ws] == list(range(1, d.index))
    for w in ws:
        lo = d.breakpoints[w.boundary - 1]
        assert w.time_i == d.breakpoints[w.boundary]
        assert paths[w.i][w.time_i] == w.cell
        assert paths[w.j][w.time_j] == w.cell
        assert lo <= w.time_j <= w.time_i and w.i != w.j
