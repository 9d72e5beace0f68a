"""Vertex-disjoint decompositions of plans.

Timesteps are 0-based. A decomposition is a list of breakpoints
``0 = t_0 < t_1 < ... < t_r = horizon`` and segment ``k`` (1-based) covers the
half-open window ``[t_{k-1}, t_k)``. Within a segment the vertex *sets* the
agents visit must be pairwise disjoint; an agent may revisit its own cells.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import PlanLike, as_vertex_lists, first_collision
from .world import Cell


class CollidingPlanError(ValueError):
    pass


@dataclass(frozen=True)
class Decomposition:
    breakpoints: tuple

    def __post_init__(self):
        bp = tuple(self.breakpoints)
        object.__setattr__(self, "breakpoints", bp)
        if len(bp) < 2 or bp[0] != 0 or any(a >= b for a, b in zip(bp, bp[1:])):
            raise ValueError(f"invalid breakpoints {bp}")

    @property
    def index(self) -> int:
        return len(self.breakpoints) - 1

    def windows(self) -> list[tuple[int, int]]:
        """Half-open ``(start, stop)`` windows, one per segment."""
        return list(zip(self.breakpoints, self.breakpoints[1:]))

    def window_of(self, t: int) -> int:
        """0-based segment number containing time ``t`` (the last one for late times)."""
        for k, (a, b) in enumerate(self.windows()):
            if t < b:
                return k
        return self.index - 1


@dataclass(frozen=True)
class SegWitness:
    """Why segment ``boundary`` could not be extended to time ``time_i``.

    Agent ``i`` is at ``cell`` at ``time_i`` (the breakpoint) and agent ``j``
    visited ``cell`` at ``time_j`` inside the preceding window.
    """

    boundary: int
    i: int
    j: int
    cell: Cell
    time_i: int
    time_j: int


def _horizon(paths) -> int:
    return max(1, max((len(p) for p in paths), default=0))


def greedy_breakpoints(paths) -> list[int]:
    """Greedy maximal-window cut positions.

    A window is acceptable when it is vertex-disjoint; a single-timestep
    window is always acceptable, which is how colliding plans still get a
    (collision-cut) index.
    """
    horizon = _horizon(paths)
    cuts = [0]
    owner: dict = {}
    clean = True  # the current window is vertex-disjoint
    for t in range(horizon):
        fresh = t == cuts[-1]
        if fresh:
            owner = {}
            clean = True
        ok = clean
        added = []
        for k, p in enumerate(paths):
            if t >= len(p):
                continue
            v = p[t]
            o = owner.get(v)
            if o is None:
                owner[v] = k
                added.append(v)
            elif o != k:
                ok = False
        if ok or fresh:
            clean = ok
            continue
        # cut at t: restart the window with the vertices at time t
        cuts.append(t)
        owner = {}
        clean = True
        for k, p in enumerate(paths):
            if t >= len(p):
                continue
            v = p[t]
            o = owner.get(v)
            if o is None:
                owner[v] = k
            elif o != k:
                clean = False
    cuts.append(horizon)
    return cuts


def index_with_collision_breaks(plan: PlanLike) -> int:
    """Greedy index of any plan; a collision forces a segment cut where it happens."""
    return len(greedy_breakpoints(as_vertex_lists(plan))) - 1


def greedy_decompose(plan: PlanLike) -> Decomposition:
    paths = as_vertex_lists(plan)
    hit = first_collision(paths)
    if hit is not None:
        raise CollidingPlanError(f"plan has a collision: {hit}")
    return Decomposition(tuple(greedy_breakpoints(paths)))


def window_is_disjoint(paths, start: int, stop: int) -> bool:
    """Whether the per-agent vertex sets over ``[start, stop)`` are pairwise disjoint."""
    owner = {}
    for k, p in enumerate(paths):
        for v in p[start:stop]:
            if owner.setdefault(v, k) != k:
                return False
    return True


def boundary_witnesses(plan: PlanLike, d: Decomposition | None = None) -> list[SegWitness]:
    """One witness per internal breakpoint.

    For breakpoint ``t_k`` the witness is the lexicographically smallest
    ordered pair ``(i, j)`` with ``path_i[t_k]`` visited by ``j`` somewhere in
    ``[t_{k-1}, t_k]``, and the earliest such visit of ``j``.
    """
    paths = as_vertex_lists(plan)
    if d is None:
        d = greedy_decompose(paths)
    if d.index < 2:
        raise ValueError("a plan with index 1 has no boundaries")
    out = []
    bp = d.breakpoints
    for k in range(1, d.index):
        lo, t = bp[k - 1], bp[k]
        found = None
        for i, pi in enumerate(paths):
            if t >= len(pi):
                continue
            v = pi[t]
            for j, pj in enumerate(paths):
                if j == i:
                    continue
                for tj in range(lo, min(t, len(pj) - 1) + 1):
                    if pj[tj] == v:
                        found = SegWitness(k, i, j, v, t, tj)
                        break
                if found:
                    break
            if found:
                break
        if found is None:
            raise ValueError(f"breakpoint {t} has no blocking pair; decomposition is not greedy")
        out.append(found)
    return out


ORACLE_MAX_STEPS = 32


def oracle_min_index(plan: PlanLike, singleton_ok: bool = True) -> int:
    """Minimum number of acceptable windows covering the plan, by dynamic programming.

    Independent of the greedy scan: ``best[b]`` is the fewest windows covering
    ``[0, b)``, minimised over every last window ``[a, b)`` that is
    acceptable. Meant for short plans only.
    """
    paths = as_vertex_lists(plan)
    horizon = _horizon(paths)
    if horizon > ORACLE_MAX_STEPS + 1:
        raise ValueError(f"plan too long for the oracle ({horizon} timesteps)")
    inf = float("inf")
    best = [0] + [inf] * horizon
    for b in range(1, horizon + 1):
        for a in range(b):
            if best[a] == inf:
                continue
            if window_is_disjoint(paths, a, b) or (singleton_ok and b - a == 1):
                best[b] = min(best[b], best[a] + 1)
    return int(best[horizon])


def segments(plan: PlanLike, d: Decomposition) -> list[list[tuple]]:
    """Per segment, each agent's sub-path (empty once the agent has disappeared)."""
    paths = as_vertex_lists(plan)
    return [[tuple(p[a:b]) for p in paths] for a, b in d.windows()]
