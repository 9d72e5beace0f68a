"""Paths, plans, constraints, conflicts and collision checking.

Agents disappear once their path ends: collisions are only checked while both
agents still have a vertex at the time in question.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .world import Cell, GridWorld, Instance


@dataclass(frozen=True)
class Path:
    agent_id: int
    vertices: tuple

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(tuple(v) for v in self.vertices))
        if not self.vertices:
            raise ValueError("a path needs at least one vertex")

    def __len__(self) -> int:
        return len(self.vertices)

    def __getitem__(self, t):
        return self.vertices[t]

    def __iter__(self):
        return iter(self.vertices)

    def at(self, t: int):
        """Vertex at time ``t`` or ``None`` once the agent has disappeared."""
        return self.vertices[t] if 0 <= t < len(self.vertices) else None

    @property
    def start(self) -> Cell:
        return self.vertices[0]

    @property
    def end(self) -> Cell:
        return self.vertices[-1]

    def is_valid_in(self, world: GridWorld) -> bool:
        vs = self.vertices
        return all(world.passable(v) for v in vs) and all(
            world.adjacent(vs[k], vs[k + 1]) for k in range(len(vs) - 1)
        )


@dataclass(frozen=True)
class Plan:
    paths: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))
        for k, p in enumerate(self.paths):
            if p.agent_id != k:
                raise ValueError(f"plan paths must be stored in agent-id order, got {p.agent_id} at {k}")

    @classmethod
    def from_vertex_lists(cls, vertex_lists: Iterable[Sequence[Cell]]) -> "Plan":
        return cls(tuple(Path(k, tuple(vs)) for k, vs in enumerate(vertex_lists)))

    def __len__(self) -> int:
        return len(self.paths)

    def __iter__(self):
        return iter(self.paths)

    def __getitem__(self, k) -> Path:
        return self.paths[k]

    def with_path(self, path: Path) -> "Plan":
        paths = list(self.paths)
        paths[path.agent_id] = path
        return Plan(tuple(paths))

    @property
    def horizon(self) -> int:
        """Number of timesteps covered, ``max_i len(path_i)`` (0 for no agents)."""
        return max((len(p) for p in self.paths), default=0)

    @property
    def makespan(self) -> int:
        """Index of the last timestep, i.e. the number of moves of the longest path."""
        return max(self.horizon - 1, 0)

    def vertex_lists(self) -> list[tuple]:
        return [p.vertices for p in self.paths]


PlanLike = Union[Plan, Sequence[Sequence[Cell]]]


def as_vertex_lists(plan: PlanLike) -> list:
    if isinstance(plan, Plan):
        return plan.vertex_lists()
    return [p.vertices if isinstance(p, Path) else tuple(p) for p in plan]


@dataclass(frozen=True)
class VertexConstraint:
    """Agent may not occupy ``cell`` at ``time``."""

    agent_id: int
    cell: Cell
    time: int


@dataclass(frozen=True)
class EdgeConstraint:
    """Agent may not traverse ``src -> dst`` arriving at ``time``."""

    agent_id: int
    src: Cell
    dst: Cell
    time: int


Constraint = Union[VertexConstraint, EdgeConstraint]


@dataclass(frozen=True)
class VertexCollision:
    i: int
    j: int
    cell: Cell
    time: int


@dataclass(frozen=True)
class EdgeCollision:
    """Agent ``i`` moves ``src -> dst`` while ``j`` moves ``dst -> src``; ``time`` is the arrival."""

    i: int
    j: int
    src: Cell
    dst: Cell
    time: int


Conflict = Union[VertexCollision, EdgeCollision]


def first_collision(plan: PlanLike):
    """Earliest vertex or edge collision, or ``None`` for a valid plan.

    Ties: lowest time, then vertex before edge, then lowest ``(i, j)``.
    """
    paths = as_vertex_lists(plan)
    horizon = max((len(p) for p in paths), default=0)
    for t in range(horizon):
        seen = {}
        vertex_hit = None
        for k, p in enumerate(paths):
            if t >= len(p):
                continue
            v = p[t]
            if v in seen:
                cand = (seen[v], k)
                if vertex_hit is None or cand < vertex_hit[:2]:
                    vertex_hit = (seen[v], k, v)
            else:
                seen[v] = k
        if vertex_hit is not None:
            i, j, v = vertex_hit
            return VertexCollision(i, j, v, t)
        if t == 0:
            continue
        moves = {}
        for k, p in enumerate(paths):
            if t < len(p) and p[t - 1] != p[t]:
                moves[(p[t - 1], p[t])] = k
        best = None
        for (u, v), i in moves.items():
            j = moves.get((v, u))
            if j is not None and i < j and (best is None or (i, j) < best[:2]):
                best = (i, j, u, v)
        if best is not None:
            i, j, u, v = best
            return EdgeCollision(i, j, u, v, t)
    return None


def constraint_tables(constraints: Iterable[Constraint]) -> tuple[set, set, int]:
    """Split constraints into ``{(cell, t)}``, ``{(src, dst, t)}`` and the latest time involved."""
    vertex, edge = set(), set()
    latest = -1
    for c in constraints:
        if isinstance(c, VertexConstraint):
            vertex.add((c.cell, c.time))
        else:
            edge.add((c.src, c.dst, c.time))
        latest = max(latest, c.time)
    return vertex, edge, latest


def path_satisfies(path: Path | Sequence[Cell], constraints: Iterable[Constraint]) -> bool:
    vs = path.vertices if isinstance(path, Path) else tuple(path)
    for c in constraints:
        if isinstance(c, VertexConstraint):
            if c.time < len(vs) and vs[c.time] == c.cell:
                return False
        elif 1 <= c.time < len(vs) and vs[c.time - 1] == c.src and vs[c.time] == c.dst:
            return False
    return True


def sum_of_costs(plan: PlanLike) -> int:
    return sum(len(p) - 1 for p in as_vertex_lists(plan))


def plan_reaches_goals(plan: Plan, instance: Instance) -> bool:
    if len(plan) != instance.n:
        return False
    return all(
        p.start == t.start and p.end == t.goal and p.is_valid_in(instance.world)
        for p, t in zip(plan, instance.tasks)
    )


# -- serialization -----------------------------------------------------------

_LINE = re.compile(r"^agent\s+(\d+)\s*:(.*)$")
_CELL = re.compile(r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)")


def plan_to_text(plan: Plan) -> str:
    lines = []
    for p in plan:
        cells = " ".join(f"({x},{y})" for x, y in p.vertices)
        lines.append(f"agent {p.agent_id}: {cells}")
    return "\n".join(lines) + "\n"


def plan_from_text(text: str) -> Plan:
    found = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        m = _LINE.match(line)
        if not m:
            raise ValueError(f"malformed plan line: {line!r}")
        cells = [(int(x), int(y)) for x, y in _CELL.findall(m.group(2))]
        found[int(m.group(1))] = cells
    if sorted(found) != list(range(len(found))):
        raise ValueError("plan agent ids must be 0..n-1")
    return Plan.from_vertex_lists(found[k] for k in range(len(found)))


def plan_to_json(plan: Plan, **extra) -> str:
    """Machine-readable dump: ``{"agents": [{"id": k, "path": [[x, y], ...]}], ...extra}``."""
    doc = {"agents": [{"id": p.agent_id, "path": [list(v) for v in p.vertices]} for p in plan]}
    doc.update(extra)
    return json.dumps(doc, indent=2)


def plan_from_json(text: str) -> Plan:
    doc = json.loads(text)
    agents = sorted(doc["agents"], key=lambda a: a["id"])
    if [a["id"] for a in agents] != list(range(len(agents))):
        raise ValueError("plan agent ids must be 0..n-1")
    return Plan.from_vertex_lists([tuple(v) for v in a["path"]] for a in agents)


def load_plan(text: str) -> Plan:
    """Read either dump format."""
    return plan_from_json(text) if text.lstrip().startswith("{") else plan_from_text(text)
