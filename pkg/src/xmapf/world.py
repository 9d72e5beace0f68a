"""Grid worlds, agent tasks and MovingAI map/scenario ingestion.

Cells are ``(x, y)`` tuples with ``x`` the column and ``y`` the row, the same
order the ``.scen`` columns use.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

Cell = tuple[int, int]

INF = float("inf")

# wait, N, E, S, W
MOVES: tuple[Cell, ...] = ((0, 0), (0, -1), (1, 0), (0, 1), (-1, 0))

BLOCKED_CHARS = frozenset("@TOW")
PASSABLE_CHARS = frozenset(".GS")


class MapFormatError(ValueError):
    """Raised for malformed map, scenario or fixture text."""


@dataclass(frozen=True)
class GridWorld:
    width: int
    height: int
    blocked: frozenset = field(default_factory=frozenset)
    allow_wait: bool = True

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"grid dimensions must be positive, got {self.width}x{self.height}")
        object.__setattr__(self, "blocked", frozenset(self.blocked))
        for x, y in self.blocked:
            if not (0 <= x < self.width and 0 <= y < self.height):
                raise ValueError(f"blocked cell {(x, y)} outside {self.width}x{self.height} grid")

    def in_bounds(self, cell: Cell) -> bool:
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height

    def passable(self, cell: Cell) -> bool:
        return self.in_bounds(cell) and cell not in self.blocked

    @cached_property
    def cells(self) -> tuple[Cell, ...]:
        """Passable cells in row-major order."""
        return tuple(
            (x, y)
            for y in range(self.height)
            for x in range(self.width)
            if (x, y) not in self.blocked
        )

    @cached_property
    def cell_index(self) -> dict[Cell, int]:
        return {c: k for k, c in enumerate(self.cells)}

    @cached_property
    def _adjacency(self) -> dict[Cell, tuple[Cell, ...]]:
        adj = {}
        for x, y in self.cells:
            out = []
            for dx, dy in MOVES:
                if dx == 0 and dy == 0 and not self.allow_wait:
                    continue
                nxt = (x + dx, y + dy)
                if self.passable(nxt):
                    out.append(nxt)
            adj[(x, y)] = tuple(out)
        return adj

    def neighbors(self, cell: Cell) -> tuple[Cell, ...]:
        try:
            return self._adjacency[cell]
        except KeyError:
            raise ValueError(f"cell {cell} is blocked or out of bounds") from None

    def adjacent(self, u: Cell, v: Cell) -> bool:
        return v in self._adjacency.get(u, ())

    def __len__(self) -> int:
        return len(self.cells)

    def to_map_text(self) -> str:
        rows = [
            "".join("@" if (x, y) in self.blocked else "." for x in range(self.width))
            for y in range(self.height)
        ]
        header = f"type octile\nheight {self.height}\nwidth {self.width}\nmap\n"
        return header + "\n".join(rows) + "\n"


def neighbors(world: GridWorld, v: Cell) -> tuple[Cell, ...]:
    return world.neighbors(v)


@dataclass(frozen=True)
class AgentTask:
    agent_id: int
    start: Cell
    goal: Cell


@dataclass(frozen=True)
class Instance:
    world: GridWorld
    tasks: tuple[AgentTask, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "tasks", tuple(self.tasks))
        for k, task in enumerate(self.tasks):
            if task.agent_id != k:
                raise ValueError(f"agent ids must be 0..n-1 in order, got {task.agent_id} at {k}")
            for name, cell in (("start", task.start), ("goal", task.goal)):
                if not self.world.passable(cell):
                    raise ValueError(f"agent {k} {name} {cell} is blocked or out of bounds")
        starts = [t.start for t in self.tasks]
        goals = [t.goal for t in self.tasks]
        if len(set(starts)) != len(starts):
            raise ValueError("agent starts must be pairwise distinct")
        if len(set(goals)) != len(goals):
            raise ValueError("agent goals must be pairwise distinct")

    @property
    def n(self) -> int:
        return len(self.tasks)

    @classmethod
    def from_pairs(cls, world: GridWorld, pairs: Iterable[tuple[Cell, Cell]]) -> "Instance":
        return cls(world, tuple(AgentTask(k, tuple(s), tuple(g)) for k, (s, g) in enumerate(pairs)))


def goal_distance_field(world: GridWorld, goal: Cell) -> dict[Cell, float]:
    """Exact BFS move distance from every passable cell to ``goal``.

    Unreachable cells map to ``INF``.
    """
    if not world.passable(goal):
        raise ValueError(f"goal {goal} is blocked or out of bounds")
    dist = {c: INF for c in world.cells}
    dist[goal] = 0
    queue = deque([goal])
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for v in world.neighbors(u):
            if dist[v] > du:
                dist[v] = du
                queue.append(v)
    return dist


def parse_map(text: str) -> GridWorld:
    lines = [ln.rstrip("\r") for ln in text.splitlines()]
    header = {}
    k = 0
    while k < len(lines):
        line = lines[k].strip()
        k += 1
        if not line:
            continue
        if line == "map":
            break
        parts = line.split()
        if len(parts) != 2:
            raise MapFormatError(f"malformed header line: {line!r}")
        header[parts[0]] = parts[1]
    else:
        raise MapFormatError("missing 'map' line")
    try:
        height = int(header["height"])
        width = int(header["width"])
    except (KeyError, ValueError):
        raise MapFormatError("header must declare integer 'height' and 'width'") from None
    body = [ln for ln in lines[k:] if ln.strip()]
    if len(body) != height:
        raise MapFormatError(f"expected {height} map rows, found {len(body)}")
    blocked = set()
    for y, row in enumerate(body):
        row = row.strip()
        if len(row) != width:
            raise MapFormatError(f"row {y} has {len(row)} cells, expected {width}")
        for x, ch in enumerate(row):
            if ch in BLOCKED_CHARS:
                blocked.add((x, y))
            elif ch not in PASSABLE_CHARS:
                raise MapFormatError(f"unknown map character {ch!r} at {(x, y)}")
    return GridWorld(width, height, frozenset(blocked))


def parse_scenario(text: str, world: GridWorld, n: int) -> Instance:
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.lower().startswith("version"):
            continue
        parts = line.split()
        if len(parts) < 8:
            raise MapFormatError(f"scenario line {lineno}: expected at least 8 columns")
        try:
            sx, sy, gx, gy = (int(p) for p in parts[4:8])
        except ValueError:
            raise MapFormatError(f"scenario line {lineno}: non-integer coordinates") from None
        rows.append(((sx, sy), (gx, gy)))
    if n < 0 or n > len(rows):
        raise MapFormatError(f"requested {n} agents but scenario has {len(rows)} rows")
    for k, (s, g) in enumerate(rows[:n]):
        for name, cell in (("start", s), ("goal", g)):
            if not world.passable(cell):
                raise MapFormatError(f"scenario row {k}: {name} {cell} is blocked or out of bounds")
    try:
        return Instance.from_pairs(world, rows[:n])
    except ValueError as exc:
        raise MapFormatError(str(exc)) from None


def scenario_text(instance: Instance, map_name: str = "map.map") -> str:
    w = instance.world
    lines = ["version 1"]
    for t in instance.tasks:
        dist = goal_distance_field(w, t.goal)[t.start]
        opt = dist if dist != INF else 0
        lines.append(
            f"0\t{map_name}\t{w.width}\t{w.height}\t{t.start[0]}\t{t.start[1]}"
            f"\t{t.goal[0]}\t{t.goal[1]}\t{opt}"
        )
    return "\n".join(lines) + "\n"


def parse_ascii(text: str) -> Instance:
    """Read the inline fixture format used by tests and examples.

    Rows of ``.`` (free) and ``@`` (blocked); lowercase letters mark agent
    starts and the matching uppercase letters their goals, so ``a``/``A`` is
    agent 0, ``b``/``B`` agent 1 and so on. Blank lines are ignored.
    """
    rows = [ln.strip() for ln in text.strip("\n").splitlines() if ln.strip()]
    if not rows:
        raise MapFormatError("empty fixture")
    width = len(rows[0])
    blocked = set()
    starts, goals = {}, {}
    for y, row in enumerate(rows):
        if len(row) != width:
            raise MapFormatError(f"fixture row {y} has {len(row)} cells, expected {width}")
        for x, ch in enumerate(row):
            if ch == "@":
                blocked.add((x, y))
            elif ch == ".":
                pass
            elif ch.isalpha() and ch.islower():
                if ch in starts:
                    raise MapFormatError(f"duplicate start {ch!r}")
                starts[ch] = (x, y)
            elif ch.isalpha() and ch.isupper():
                if ch in goals:
                    raise MapFormatError(f"duplicate goal {ch!r}")
                goals[ch.lower()] = (x, y)
            else:
                raise MapFormatError(f"unknown fixture character {ch!r} at {(x, y)}")
    labels = sorted(starts)
    if sorted(goals) != labels or labels != [chr(ord("a") + k) for k in range(len(labels))]:
        raise MapFormatError("fixture agents must be a, b, c, ... each with a start and a goal")
    world = GridWorld(width, len(rows), frozenset(blocked))
    return Instance.from_pairs(world, [(starts[c], goals[c]) for c in labels])


def render_ascii(instance: Instance) -> str:
    grid = [
        ["@" if (x, y) in instance.world.blocked else "." for x in range(instance.world.width)]
        for y in range(instance.world.height)
    ]
    for t in instance.tasks:
        label = chr(ord("a") + t.agent_id)
        grid[t.start[1]][t.start[0]] = label
        gx, gy = t.goal
        # a goal sitting on another agent's start keeps the start marker
        if grid[gy][gx] in ".":
            grid[gy][gx] = label.upper()
    return "\n".join("".join(r) for r in grid)
