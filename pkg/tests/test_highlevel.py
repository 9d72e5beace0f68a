import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fixtures import TWO_SEGMENT_PLAN, THREE_SEGMENT_PLAN, diagonal_instance
from oracles import joint_solvable, optimal_index_two_agents
from xmapf.core import (
    EdgeCollision,
    EdgeConstraint,
    Plan,
    VertexCollision,
    VertexConstraint,
    first_collision,
    path_satisfies,
    plan_reaches_goals,
)
from xmapf.highlevel import (
    NOT_FOUND,
    SOLVED,
    TIMEOUT,
    UNSOLVABLE,
    _split,
    _witness_split,
    conflict_check,
    solve_cbs,
    solve_xg_cbs,
)
from xmapf.segmentation import boundary_witnesses, greedy_decompose, window_is_disjoint
from xmapf.world import INF, GridWorld, Instance, parse_ascii


def assert_sound(result, inst, r=INF):
    assert result.status == SOLVED
    sol = result.solution
    plan = sol.plan
    assert plan_reaches_goals(plan, inst)
    assert first_collision(plan) is None
    assert sol.decomposition == greedy_decompose(plan)
    assert sol.index <= r
    for p in plan:
        assert path_satisfies(p, [c for c in sol.constraints if c.agent_id == p.agent_id])
    paths = plan.vertex_lists()
    for a, b in sol.decomposition.windows():
        assert window_is_disjoint(paths, a, b)


# -- conflict classification -------------------------------------------------------


def test_conflict_check_collision_first():
    paths = [[(0, 0), (1, 0)], [(1, 0), (1, 1), (1, 0)], [(2, 1), (1, 1)]]
    kind, info = conflict_check(Plan.from_vertex_lists(paths), 1)
    assert kind == "collision"
    assert info == VertexCollision(1, 2, (1, 1), 1)


def test_conflict_check_bound_edges():
    plan = Plan.from_vertex_lists(THREE_SEGMENT_PLAN)
    assert conflict_check(plan, 3)[0] == "valid"
    kind, ws = conflict_check(plan, 2)
    assert kind == "segmentation" and len(ws) == 2
    kind, ws = conflict_check(plan, 2, "first-boundary")
    assert len(ws) == 1 and ws[0].boundary == 1


def test_conflict_check_reports_index_minus_one_boundaries():
    plan = Plan.from_vertex_lists(TWO_SEGMENT_PLAN)
    kind, ws = conflict_check(plan, 1)
    assert kind == "segmentation" and len(ws) == 1


def test_splits():
    assert _split(VertexCollision(0, 2, (1, 1), 3)) == [
        VertexConstraint(0, (1, 1), 3),
        VertexConstraint(2, (1, 1), 3),
    ]
    assert _split(EdgeCollision(0, 1, (0, 0), (1, 0), 1)) == [
        EdgeConstraint(0, (0, 0), (1, 0), 1),
        EdgeConstraint(1, (1, 0), (0, 0), 1),
    ]
    ws = boundary_witnesses(TWO_SEGMENT_PLAN)
    assert _witness_split(ws) == [VertexConstraint(1, (1, 1), 3), VertexConstraint(0, (1, 1), 1)]


# -- vanilla CBS ---------------------------------------------------------------------


def test_cbs_disjoint_root():
    inst = parse_ascii("a..A\n....\nb..B")
    res = solve_cbs(inst)
    assert_sound(res, inst)
    assert res.stats.expanded == 1
    assert res.solution.sum_of_costs == 6


def test_cbs_single_split():
    # both agents want the centre cell at time 1
    inst = parse_ascii(".a.\nb.B\n.A.")
    res = solve_cbs(inst)
    assert_sound(res, inst)
    assert res.stats.expanded >= 2
    assert res.solution.sum_of_costs == 5


def _swap():
    # each goal is the other agent's start, so neither can vanish early
    return Instance.from_pairs(GridWorld(5, 1), [((0, 0), (4, 0)), ((4, 0), (0, 0))])


def test_cbs_corridor_swap_is_unsolvable():
    inst = _swap()
    assert not joint_solvable(inst.world, inst.tasks)
    res = solve_cbs(inst, length_bound=12)
    assert res.status == UNSOLVABLE


def test_cbs_timeout_status():
    inst = diagonal_instance()
    res = solve_cbs(inst, max_expansions=0)
    assert res.status == TIMEOUT and res.solution is None


def test_no_agents():
    inst = Instance(GridWorld(2, 2))
    assert solve_cbs(inst).solution.index == 1
    assert solve_xg_cbs(inst, 1).solution.index == 1


# -- XG-CBS -----------------------------------------------------------------------------


def test_xg_cbs_rejects_bad_bound():
    with pytest.raises(ValueError):
        solve_xg_cbs(diagonal_instance(), 0)
    with pytest.raises(ValueError):
        solve_xg_cbs(diagonal_instance(), 2, seg_branch="some")


def test_xg_cbs_unbounded_behaves_like_a_mapf_solver():
    inst = diagonal_instance()
    res = solve_xg_cbs(inst, INF)
    assert_sound(res, inst)


@pytest.mark.parametrize("low", ["astar", "xg", "sr"])
def test_xg_cbs_diagonal_reaches_optimum(low):
    inst = diagonal_instance()
    assert solve_cbs(inst).solution.index == 3
    res = solve_xg_cbs(inst, 2, low, max_expansions=2000)
    assert_sound(res, inst, 2)


def test_xg_cbs_weighted():
    inst = diagonal_instance()
    res = solve_xg_cbs(inst, 2, "wxg", weight=0.5, max_expansions=2000)
    assert_sound(res, inst, 2)
    assert res.algorithm == "xg-cbs/wxg@0.5"


def test_xg_cbs_first_boundary_branching():
    inst = diagonal_instance()
    res = solve_xg_cbs(inst, 2, "astar", seg_branch="first-boundary", max_expansions=2000)
    assert_sound(res, inst, 2)


def test_passing_through_a_finished_agent():
    inst = parse_ascii("aB.Ab")
    assert joint_solvable(inst.world, inst.tasks)
    assert_sound(solve_cbs(inst), inst)


def test_xg_cbs_infeasible_bound_with_sr_is_not_found():
    inst = _swap()
    res = solve_xg_cbs(inst, 1, "sr", length_bound=8)
    assert res.status == NOT_FOUND


def test_xg_cbs_infeasible_bound_complete_planner():
    inst = _swap()
    res = solve_xg_cbs(inst, 1, "xg", length_bound=8)
    assert res.status == UNSOLVABLE


def test_determinism():
    inst = diagonal_instance()
    a = solve_xg_cbs(inst, 2, "xg", max_expansions=2000)
    b = solve_xg_cbs(inst, 2, "xg", max_expansions=2000)
    assert a.solution.plan == b.solution.plan
    assert (a.stats.expanded, a.stats.generated, a.stats.low_level_calls) == (
        b.stats.expanded, b.stats.generated, b.stats.low_level_calls,
    )


def _two_agent_instance(seed, size):
    rng = random.Random(seed)
    w = GridWorld(size, size)
    s = rng.sample(w.cells, 2)
    g = rng.sample(w.cells, 2)
    return Instance.from_pairs(w, zip(s, g))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**9))
def test_xg_cbs_matches_optimal_index_oracle(seed):
    inst = _two_agent_instance(seed, 3)
    (s0, g0), (s1, g1) = [(t.start, t.goal) for t in inst.tasks]
    opt = optimal_index_two_agents(inst.world, s0, g0, s1, g1)
    if opt is None:
        return
    res = solve_xg_cbs(inst, opt, "xg", max_expansions=500)
    assert_sound(res, inst, opt)
