"""Single-agent planners: space-time A*, XG-A*, weighted XG-A* and SR-A*.

Every planner answers a :class:`LowLevelQuery` with a :class:`~xmapf.core.Path`
or ``None``. Time is discrete, each step is a move or a wait, and a path ends
(the agent disappears) the moment it reaches its goal.
"""
from __future__ import annotations

import bisect
import heapq
import itertools
import math
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

from .core import Path, constraint_tables
from .segmentation import greedy_breakpoints, index_with_collision_breaks
from .world import INF, AgentTask, Cell, GridWorld, goal_distance_field

NEVER = 1 << 60
_CLOCK_EVERY = 1024  # heap pops between deadline checks


class PlannerTimeout(Exception):
    """Raised when a low-level search runs past its query's deadline."""


def _check(deadline, pops):
    if deadline is not None and pops % _CLOCK_EVERY == 0 and time.perf_counter() > deadline:
        raise PlannerTimeout


@dataclass(frozen=True)
class LowLevelQuery:
    world: GridWorld
    task: AgentTask
    constraints: frozenset = frozenset()
    others: tuple = ()
    length_bound: Optional[int] = None
    index_budget: float = INF
    # absolute time.perf_counter() value after which the search gives up
    deadline: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "constraints", frozenset(self.constraints))
        object.__setattr__(self, "others", tuple(tuple(p) for p in self.others))
        for c in self.constraints:
            if c.agent_id != self.task.agent_id:
                raise ValueError(f"constraint {c} is not for agent {self.task.agent_id}")
        if self.length_bound is not None and self.length_bound < 1:
            raise ValueError("length bound must be at least 1")

    @property
    def bound(self) -> int:
        """Maximum number of vertices a returned path may have."""
        if self.length_bound is not None:
            return self.length_bound
        return (len(self.others) + 2) * len(self.world)


@dataclass(frozen=True)
class XgOptions:
    eliminate_cycles: bool = True
    fallback_after_budget: bool = True
    # rerun without cycle pruning when the pruned search finds nothing;
    # constraints can make every pruned completion infeasible
    retry_unpruned: bool = True
    debug_check: bool = False


@lru_cache(maxsize=4096)
def _distances(world: GridWorld, goal: Cell) -> dict:
    return goal_distance_field(world, goal)


def _rebuild(nodes, k) -> list:
    out = []
    while k is not None:
        out.append(nodes[k][0])
        k = nodes[k][-1]
    out.reverse()
    return out


def _space_time_astar(world, start, goal, t0, vforb, eforb, horizon, bound, blocked_at=None,
                      wait_exempt=False, deadline=None):
    """Shortest (fewest timesteps) path from ``(start, t0)`` to ``goal``.

    States later than ``horizon`` are time-invariant, so they are closed on
    the vertex alone. With ``wait_exempt`` the ``blocked_at`` test is skipped
    while the agent is still waiting at ``start``. Returns the vertices from
    ``t0`` on, or ``None``.
    """
    h = _distances(world, goal)
    if h[start] == INF or t0 + h[start] > bound - 1:
        return None
    if (start, t0) in vforb:
        return None
    if blocked_at is not None and not wait_exempt and blocked_at(start, t0):
        return None
    cap = horizon + 1
    # node: (v, t, still waiting at start, parent)
    nodes = [(start, t0, wait_exempt, None)]
    seq = itertools.count()
    heap = [(t0 + h[start], -t0, next(seq), 0)]
    closed = set()
    pops = 0
    while heap:
        pops += 1
        _check(deadline, pops)
        _, negt, _, k = heapq.heappop(heap)
        v, t, idle, _ = nodes[k]
        key = (v, min(t, cap), idle)
        if key in closed:
            continue
        closed.add(key)
        if v == goal:
            return _rebuild(nodes, k)
        t1 = t + 1
        if t1 > bound - 1:
            continue
        for u in world.neighbors(v):
            if h[u] == INF or t1 + h[u] > bound - 1:
                continue
            if (u, t1) in vforb or (v, u, t1) in eforb:
                continue
            idle1 = idle and u == v
            if blocked_at is not None and not idle1 and blocked_at(u, t1):
                continue
            if (u, min(t1, cap), idle1) in closed:
                continue
            nodes.append((u, t1, idle1, k))
            heapq.heappush(heap, (t1 + h[u], -t1, next(seq), len(nodes) - 1))
    return None


def astar(q: LowLevelQuery) -> Optional[Path]:
    """Space-time A* honouring the query's constraints; ignores ``others``."""
    vforb, eforb, latest = constraint_tables(q.constraints)
    vs = _space_time_astar(q.world, q.task.start, q.task.goal, 0, vforb, eforb, latest, q.bound,
                           deadline=q.deadline)
    return None if vs is None else Path(q.task.agent_id, tuple(vs))


# -- explanation-guided search -------------------------------------------------


class _OthersProfile:
    """Precomputed view of the other agents' paths as bitmasks over cells."""

    def __init__(self, world: GridWorld, others):
        self.bit = {c: 1 << k for c, k in world.cell_index.items()}
        self.paths = [tuple(p) for p in others]
        self.T = max((len(p) for p in self.paths), default=0)
        self.occ = []
        self.clash = []
        for t in range(self.T):
            m = 0
            hit = False
            for p in self.paths:
                if t < len(p):
                    b = self.bit[p[t]]
                    hit = hit or bool(m & b)
                    m |= b
            self.occ.append(m)
            self.clash.append(hit)
        self._unions = {}
        self._bad = {}
        self._cuts = {}

    def occ_at(self, t):
        return self.occ[t] if t < self.T else 0

    def clash_at(self, t):
        return self.clash[t] if t < self.T else False

    def union(self, a, t):
        """Cells any other agent visits in ``[a, t]``."""
        if a >= self.T:
            return 0
        row = self._unions.get(a)
        if row is None:
            row = []
            m = 0
            for u in range(a, self.T):
                m |= self.occ[u]
                row.append(m)
            self._unions[a] = row
        return row[min(t, self.T - 1) - a]

    def bad_ext(self, a):
        """First ``t > a`` at which the others alone break the window opened at ``a``."""
        got = self._bad.get(a)
        if got is not None:
            return got
        res = NEVER
        if a < self.T and self.clash[a]:
            res = a + 1
        else:
            owner = {}
            for t in range(a, self.T):
                bad = False
                for k, p in enumerate(self.paths):
                    if t < len(p):
                        o = owner.setdefault(p[t], k)
                        if o != k:
                            bad = True
                if bad:
                    res = t
                    break
        self._bad[a] = res
        return res

    def cuts_from(self, b):
        """Cuts the others alone produce once a fresh window opens at ``b``."""
        got = self._cuts.get(b)
        if got is None:
            got = len(greedy_breakpoints([p[b:] for p in self.paths])) - 2
            self._cuts[b] = got
        return got

    def tail(self, a, S, taint, t_end):
        """Extra cuts after the planned agent disappears at ``t_end``."""
        u = t_end + 1
        if u >= self.T:
            return 0
        if taint:
            return 1 + self.cuts_from(u)
        limit = self.bad_ext(a)
        for u in range(t_end + 1, self.T):
            if u >= limit or S & self.occ[u]:
                return 1 + self.cuts_from(u)
        return 0


def combined_index_prefix(prefix, others) -> int:
    """Index of ``{prefix} + others`` with everything truncated at the prefix's last time."""
    vs = tuple(prefix.vertices if isinstance(prefix, Path) else prefix)
    stop = len(vs)
    return index_with_collision_breaks([vs] + [tuple(p)[:stop] for p in others])


def _xg_search(q: LowLevelQuery, opts: XgOptions, weight: Optional[float]):
    world, task = q.world, q.task
    goal = task.goal
    h = _distances(world, goal)
    B = q.bound
    if h[task.start] == INF or h[task.start] > B - 1:
        return None
    vforb, eforb, latest = constraint_tables(q.constraints)
    if (task.start, 0) in vforb:
        return None
    prof = _OthersProfile(world, q.others)
    bit = prof.bit
    budget = q.index_budget
    prune = opts.eliminate_cycles
    # a pruned cycle is replaced by waiting, which retimes the window; that
    # is only safe when no constraint falls inside the retimed span
    ctimes = sorted({c.time for c in q.constraints})

    def unconstrained(lo, hi):
        k = bisect.bisect_left(ctimes, lo)
        return k == len(ctimes) or ctimes[k] > hi

    seq = itertools.count()

    if weight is None:
        def prio(i, hv, t):
            return (i, hv, t)
    else:
        w = weight

        def prio(i, hv, t):
            return (w * i + (1 - w) * (t + hv), i, hv, t)

    # node: (v, t, a, S, taint, i, parent)
    nodes = []
    best = {}
    heap = []
    fallback_failed = set()

    def push(v, t, a, S, taint, i, parent):
        key = (v, t, a, S, taint)
        old = best.get(key)
        if old is not None and old <= i:
            return
        best[key] = i
        nodes.append((v, t, a, S, taint, i, parent))
        k = len(nodes) - 1
        heapq.heappush(heap, (prio(i, h[v], t), next(seq), k, False))
        if v == goal:
            total = i + prof.tail(a, S, taint, t)
            heapq.heappush(heap, (prio(total, 0, t), next(seq), k, True))

    s = task.start
    sb = bit[s]
    push(s, 0, 0, sb, prof.clash_at(0) or bool(sb & prof.occ_at(0)), 1, None)

    pops = 0
    while heap:
        pops += 1
        _check(q.deadline, pops)
        _, _, k, terminal = heapq.heappop(heap)
        v, t, a, S, taint, i, _ = nodes[k]
        if best.get((v, t, a, S, taint)) != i:
            continue
        if opts.debug_check:
            prefix = _rebuild(nodes, k)
            assert combined_index_prefix(prefix, prof.paths) == i, (prefix, i)
        if terminal:
            return _rebuild(nodes, k)
        if opts.fallback_after_budget and i > budget:
            if (v, t) in fallback_failed:
                continue
            rest = _space_time_astar(world, v, goal, t, vforb, eforb, latest, B, deadline=q.deadline)
            if rest is None:
                fallback_failed.add((v, t))
                continue
            return _rebuild(nodes, k) + rest[1:]
        t1 = t + 1
        if t1 > B - 1:
            continue
        occ1 = prof.occ_at(t1)
        for u in world.neighbors(v):
            hu = h[u]
            if hu == INF or t1 + hu > B - 1:
                continue
            if (u, t1) in vforb or (v, u, t1) in eforb:
                continue
            b = bit[u]
            if not taint and t1 < prof.bad_ext(a) and not ((S | b) & prof.union(a, t1)):
                if prune and (S & b) and not (u == v and S == b) and unconstrained(a, t1):
                    continue
                push(u, t1, a, S | b, False, i, k)
            else:
                push(u, t1, t1, b, prof.clash_at(t1) or bool(b & occ1), i + 1, k)
    return None


def _run_xg(q, opts, weight):
    opts = opts or XgOptions()
    vs = _xg_search(q, opts, weight)
    if vs is None and opts.eliminate_cycles and opts.retry_unpruned:
        vs = _xg_search(q, XgOptions(False, opts.fallback_after_budget, False, opts.debug_check), weight)
    return None if vs is None else Path(q.task.agent_id, tuple(vs))


def xg_astar(q: LowLevelQuery, opts: XgOptions | None = None) -> Optional[Path]:
    """Search ordered by the combined index of ``{path} + others``, then distance to goal.

    Returns a path whose combined index is minimal among constraint-satisfying
    paths within the length bound (when the budget fallback does not fire).
    """
    return _run_xg(q, opts, None)


def wxg_astar(q: LowLevelQuery, w: float, opts: XgOptions | None = None) -> Optional[Path]:
    """XG-A* over the same nodes, ordered by ``w * index + (1 - w) * (g + h)``."""
    if not 0 < w < 1:
        raise ValueError("weight must lie strictly between 0 and 1; use astar or xg_astar")
    return _run_xg(q, opts, float(w))


# -- segmentation-respecting search ---------------------------------------------


@dataclass(frozen=True)
class TimedObstacleSet:
    """Cells occupied by other agents, per segment window of their combined plan.

    ``windows`` holds ``(start, stop, cells)``; the last window stays in force
    after the other agents have disappeared, so a path that avoids every
    obstacle never adds a breakpoint.
    """

    windows: tuple = ()
    _starts: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_starts", tuple(w[0] for w in self.windows))

    @property
    def horizon(self) -> int:
        """Time from which the obstacle set no longer changes."""
        return self.windows[-1][0] if self.windows else 0

    def cells_at(self, t: int) -> frozenset:
        if not self.windows or t < 0:
            return frozenset()
        lo, hi = 0, len(self._starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self._starts[mid] <= t:
                lo = mid
            else:
                hi = mid - 1
        return self.windows[lo][2]

    def blocked(self, cell: Cell, t: int) -> bool:
        return cell in self.cells_at(t)


def build_timed_obstacles(others) -> TimedObstacleSet:
    paths = [tuple(p) for p in others]
    if not paths:
        return TimedObstacleSet()
    bp = greedy_breakpoints(paths)
    windows = []
    for a, b in zip(bp, bp[1:]):
        cells = frozenset(v for p in paths for v in p[a:b])
        windows.append((a, b, cells))
    return TimedObstacleSet(tuple(windows))


def sr_astar(q: LowLevelQuery, relax: bool = False) -> Optional[Path]:
    """Space-time A* that treats each segment of ``others`` as a timed obstacle.

    Any path found by the strict search leaves the greedy index of
    ``others`` unchanged. With ``relax`` and no strict path, a second search
    lets obstacles lapse once every other agent has finished and lets the
    agent wait at its start while that cell is an obstacle; such a path may
    add breakpoints.
    """
    obstacles = build_timed_obstacles(q.others)
    vforb, eforb, latest = constraint_tables(q.constraints)
    blocked = obstacles.blocked if obstacles.windows else None
    horizon = max(latest, obstacles.horizon)
    args = (q.world, q.task.start, q.task.goal, 0, vforb, eforb)
    vs = _space_time_astar(*args, horizon, q.bound, blocked_at=blocked, deadline=q.deadline)
    if vs is None and relax and blocked is not None:
        end = max(len(p) for p in q.others)

        def lapsing(cell, t):
            return t < end and obstacles.blocked(cell, t)

        vs = _space_time_astar(*args, max(latest, end), q.bound, blocked_at=lapsing, wait_exempt=True,
                               deadline=q.deadline)
    return None if vs is None else Path(q.task.agent_id, tuple(vs))


# -- selection -----------------------------------------------------------------

PLANNER_NAMES = ("astar", "xg", "wxg", "sr")
COMPLETE_PLANNERS = frozenset({"astar", "xg", "wxg"})


def make_planner(name: str, weight: float | None = None, opts: XgOptions | None = None) -> Callable:
    if name == "astar":
        return astar
    if name == "xg":
        return lambda q: xg_astar(q, opts)
    if name == "wxg":
        if weight is None:
            raise ValueError("wxg needs a weight")
        if not 0 < weight < 1:
            raise ValueError("weight must lie strictly between 0 and 1")
        return lambda q: wxg_astar(q, weight, opts)
    if name == "sr":
        return lambda q: sr_astar(q, relax=True)
    raise ValueError(f"unknown low-level planner {name!r}; choose from {PLANNER_NAMES}")


def uses_others(name: str) -> bool:
    return name in ("xg", "wxg", "sr")


def default_length_bound(world: GridWorld, n_agents: int, r: float) -> int:
    """Vertex cap for low-level paths: ``(r + 1) * |V|``, or ``(n + 1) * |V|`` when ``r`` is unbounded."""
    if r == INF or (isinstance(r, float) and math.isinf(r)):
        return (n_agents + 1) * len(world)
    return (int(r) + 1) * len(world)
