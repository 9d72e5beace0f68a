"""Constraint-tree search: vanilla CBS and explanation-guided CBS (XG-CBS)."""
from __future__ import annotations

import heapq
import itertools
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from .core import (
    EdgeCollision,
    EdgeConstraint,
    Plan,
    VertexCollision,
    VertexConstraint,
    first_collision,
    sum_of_costs,
)
from .lowlevel import (
    COMPLETE_PLANNERS,
    LowLevelQuery,
    PlannerTimeout,
    XgOptions,
    default_length_bound,
    make_planner,
)
from .segmentation import (
    Decomposition,
    boundary_witnesses,
    greedy_breakpoints,
    greedy_decompose,
    index_with_collision_breaks,
)
from .world import INF, Instance

log = logging.getLogger(__name__)

SOLVED = "solved"
UNSOLVABLE = "unsolvable"
NOT_FOUND = "not_found"
TIMEOUT = "timeout"

SEG_BRANCH_MODES = ("all-boundaries", "first-boundary")


@dataclass
class SearchStats:
    expanded: int = 0
    generated: int = 0
    low_level_calls: int = 0
    wall_time: float = 0.0

    def as_dict(self) -> dict:
        return {
            "expanded": self.expanded,
            "generated": self.generated,
            "low_level_calls": self.low_level_calls,
            "wall_time": self.wall_time,
        }


@dataclass
class Solution:
    plan: Plan
    decomposition: Decomposition
    stats: SearchStats
    constraints: frozenset = frozenset()

    @property
    def index(self) -> int:
        return self.decomposition.index

    @property
    def sum_of_costs(self) -> int:
        return sum_of_costs(self.plan)


@dataclass
class SolveResult:
    status: str
    solution: Optional[Solution]
    stats: SearchStats
    algorithm: str = ""
    bound: float = INF

    @property
    def solved(self) -> bool:
        return self.status == SOLVED


@dataclass
class Budget:
    """Stopping rule: wall-clock seconds and/or a cap on constraint-tree expansions."""

    timeout: Optional[float] = None
    max_expansions: Optional[int] = None
    _t0: float = field(default_factory=time.perf_counter, repr=False)

    def start(self):
        self._t0 = time.perf_counter()

    def exhausted(self, stats: SearchStats) -> bool:
        if self.max_expansions is not None and stats.expanded >= self.max_expansions:
            return True
        return self.timeout is not None and time.perf_counter() - self._t0 > self.timeout

    def deadline(self) -> Optional[float]:
        return None if self.timeout is None else self._t0 + self.timeout

    def elapsed(self) -> float:
        return time.perf_counter() - self._t0


@dataclass(order=True)
class CTNode:
    cost_key: tuple
    constraints: frozenset = field(compare=False)
    plan: Plan = field(compare=False)


def conflict_check(plan: Plan, r: float, seg_branch: str = "all-boundaries"):
    """Classify a plan: ``("collision", conflict)``, ``("segmentation", witnesses)`` or ``("valid", None)``."""
    hit = first_collision(plan)
    if hit is not None:
        return "collision", hit
    d = greedy_decompose(plan)
    if d.index <= r:
        return "valid", d
    witnesses = boundary_witnesses(plan, d)
    if seg_branch == "first-boundary":
        witnesses = witnesses[:1]
    return "segmentation", witnesses


def _split(conflict) -> list:
    if isinstance(conflict, VertexCollision):
        return [
            VertexConstraint(conflict.i, conflict.cell, conflict.time),
            VertexConstraint(conflict.j, conflict.cell, conflict.time),
        ]
    if isinstance(conflict, EdgeCollision):
        return [
            EdgeConstraint(conflict.i, conflict.src, conflict.dst, conflict.time),
            EdgeConstraint(conflict.j, conflict.dst, conflict.src, conflict.time),
        ]
    raise TypeError(conflict)


def _witness_split(witnesses) -> list:
    out = []
    for w in witnesses:
        out.append(VertexConstraint(w.i, w.cell, w.time_i))
        out.append(VertexConstraint(w.j, w.cell, w.time_j))
    return out


class _Search:
    def __init__(self, instance, planner, r, length_bound, budget, pass_others, seg_branch, xg_cost):
        self.inst = instance
        self.planner = planner
        self.r = r
        self.B = length_bound or default_length_bound(instance.world, instance.n, r)
        self.budget = budget or Budget()
        self.pass_others = pass_others
        self.seg_branch = seg_branch
        self.xg_cost = xg_cost
        self.stats = SearchStats()
        self.seq = itertools.count()

    def cost_key(self, plan):
        soc = sum_of_costs(plan)
        if self.xg_cost:
            return (index_with_collision_breaks(plan), soc, next(self.seq))
        return (soc, next(self.seq))

    def low_level(self, agent, constraints, others):
        self.stats.low_level_calls += 1
        mine = frozenset(c for c in constraints if c.agent_id == agent)
        others = tuple(others) if self.pass_others else ()
        budget = INF
        if others:
            budget = len(greedy_breakpoints(others)) - 1
        q = LowLevelQuery(
            self.inst.world, self.inst.tasks[agent], mine, others, self.B, budget,
            self.budget.deadline(),
        )
        return self.planner(q)

    def root(self):
        paths = []
        for task in self.inst.tasks:
            p = self.low_level(task.agent_id, frozenset(), [x.vertices for x in paths])
            if p is None:
                return None
            paths.append(p)
        plan = Plan(tuple(paths))
        self.stats.generated += 1
        return CTNode(self.cost_key(plan), frozenset(), plan)

    def run(self):
        self.budget.start()
        try:
            return self._run()
        except PlannerTimeout:
            return TIMEOUT, None
        finally:
            self.stats.wall_time = self.budget.elapsed()

    def _run(self):
        if self.inst.n == 0:
            plan = Plan(())
            return SOLVED, Solution(plan, greedy_decompose(plan), self.stats)
        root = self.root()
        if root is None:
            return "root_failed", None
        open_list = [root]
        while open_list:
            if self.budget.exhausted(self.stats):
                return TIMEOUT, None
            node = heapq.heappop(open_list)
            self.stats.expanded += 1
            kind, info = conflict_check(node.plan, self.r, self.seg_branch)
            if kind == "valid":
                return SOLVED, Solution(node.plan, info, self.stats, node.constraints)
            new = _split(info) if kind == "collision" else _witness_split(info)
            for c in new:
                if c in node.constraints:
                    continue
                cons = node.constraints | {c}
                agent = c.agent_id
                others = [p.vertices for p in node.plan if p.agent_id != agent]
                path = self.low_level(agent, cons, others)
                if path is None:
                    continue
                plan = node.plan.with_path(path)
                self.stats.generated += 1
                heapq.heappush(open_list, CTNode(self.cost_key(plan), cons, plan))
        return "exhausted", None


def solve_cbs(
    instance: Instance,
    timeout: float | None = None,
    max_expansions: int | None = None,
    length_bound: int | None = None,
) -> SolveResult:
    """Vanilla CBS: A* low level, nodes ordered by sum of costs."""
    search = _Search(
        instance, make_planner("astar"), INF, length_bound,
        Budget(timeout, max_expansions), False, "all-boundaries", False,
    )
    status, sol = search.run()
    if status in ("root_failed", "exhausted"):
        status = UNSOLVABLE
    if sol is not None:
        sol = Solution(sol.plan, greedy_decompose(sol.plan), search.stats, sol.constraints)
    return SolveResult(status, sol, search.stats, "cbs", INF)


def solve_xg_cbs(
    instance: Instance,
    r: float = INF,
    low: str = "xg",
    timeout: float | None = None,
    *,
    weight: float | None = None,
    xg_options: XgOptions | None = None,
    max_expansions: int | None = None,
    length_bound: int | None = None,
    seg_branch: str = "all-boundaries",
    planner: Callable | None = None,
) -> SolveResult:
    """XG-CBS at index bound ``r`` with the chosen low-level planner.

    Status is ``solved``, ``unsolvable`` (tree exhausted with a complete
    planner), ``not_found`` (exhausted with SR-A*) or ``timeout``.
    """
    if r < 1:
        raise ValueError("index bound must be at least 1")
    if seg_branch not in SEG_BRANCH_MODES:
        raise ValueError(f"seg_branch must be one of {SEG_BRANCH_MODES}")
    if planner is None:
        planner = make_planner(low, weight, xg_options)
    search = _Search(
        instance, planner, r, length_bound, Budget(timeout, max_expansions),
        True, seg_branch, True,
    )
    status, sol = search.run()
    if status in ("root_failed", "exhausted"):
        status = UNSOLVABLE if low in COMPLETE_PLANNERS else NOT_FOUND
    label = f"xg-cbs/{low}" + (f"@{weight}" if low == "wxg" else "")
    return SolveResult(status, sol, search.stats, label, r)
