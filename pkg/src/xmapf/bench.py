"""Benchmark harness: CBS baseline, iterative bound lowering and summary tables.

A suite is a JSON file::

    {
      "per_run_timeout": 300,
      "seed": 0,
      "algorithms": [{"low": "xg"}, {"low": "wxg", "weight": 0.5}, {"low": "sr"}],
      "instances": [{"map": "maps/x.map", "scen": "maps/x.scen", "agents": 4}],
      "generate": [{"size": 9, "agents": [4, 6], "count": 10, "density": 0.0}]
    }

Relative paths resolve against the suite file's directory. ``generate`` blocks
expand into seeded random instances (distinct starts, distinct goals, all in
the largest connected region of the grid).
"""
from __future__ import annotations

import csv
import io
import json
import logging
import os
import random
import statistics
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

from .highlevel import SOLVED, UNSOLVABLE, SolveResult, solve_cbs, solve_xg_cbs
from .world import INF, GridWorld, Instance, goal_distance_field, parse_map, parse_scenario

log = logging.getLogger(__name__)

PHASES = ("baseline", "first", "best")

RECORD_COLUMNS = (
    "instance_id",
    "grid",
    "agents",
    "algorithm",
    "phase",
    "outcome",
    "bound",
    "index",
    "sum_of_costs",
    "avg_cost",
    "makespan",
    "wall_time",
    "expanded",
)

SUMMARY_COLUMNS = (
    "grid",
    "agents",
    "algorithm",
    "phase",
    "runs",
    "solved",
    "success_rate",
    "mean_index",
    "mean_avg_cost",
    "mean_time",
)


# -- configuration -------------------------------------------------------------


@dataclass(frozen=True)
class InstanceSpec:
    """Either a map/scenario pair or a generated grid (``size`` set)."""

    agents: int
    map: Optional[str] = None
    scen: Optional[str] = None
    size: Optional[int] = None
    density: float = 0.0
    seed: int = 0

    @property
    def instance_id(self) -> str:
        if self.size is not None:
            return f"g{self.size}-d{self.density:g}-n{self.agents}-s{self.seed}"
        stem = os.path.splitext(os.path.basename(self.scen or ""))[0]
        return f"{stem}-n{self.agents}"

    def load(self) -> Instance:
        if self.size is not None:
            return random_instance(self.size, self.agents, self.seed, self.density)
        with open(self.map) as fh:
            world = parse_map(fh.read())
        with open(self.scen) as fh:
            return parse_scenario(fh.read(), world, self.agents)


@dataclass(frozen=True)
class AlgoSpec:
    low: str = "xg"
    weight: Optional[float] = None

    @property
    def algorithm_id(self) -> str:
        if self.low == "wxg":
            return f"xg-cbs/wxg@{self.weight:g}"
        return f"xg-cbs/{self.low}"


@dataclass
class ExperimentConfig:
    instances: list = field(default_factory=list)
    algorithms: list = field(default_factory=lambda: [AlgoSpec("xg")])
    per_run_timeout: float = 300.0
    seed: int = 0
    # replaces the wall-clock timeout with a cap on constraint-tree expansions
    test_budget: Optional[int] = None

    def __post_init__(self):
        if self.per_run_timeout <= 0:
            raise ValueError("per_run_timeout must be positive")
        if self.test_budget is not None and self.test_budget < 1:
            raise ValueError("test_budget must be positive")

    @classmethod
    def from_json(cls, text: str, base_dir: str = ".") -> "ExperimentConfig":
        raw = json.loads(text)
        seed = int(raw.get("seed", 0))
        rng = random.Random(seed)

        def path(p):
            return p if os.path.isabs(p) else os.path.join(base_dir, p)

        instances = [
            InstanceSpec(int(e["agents"]), map=path(e["map"]), scen=path(e["scen"]))
            for e in raw.get("instances", [])
        ]
        for block in raw.get("generate", []):
            counts = block["agents"]
            counts = counts if isinstance(counts, list) else [counts]
            for n in counts:
                for _ in range(int(block.get("count", 1))):
                    instances.append(
                        InstanceSpec(
                            int(n), size=int(block["size"]),
                            density=float(block.get("density", 0.0)),
                            seed=rng.randrange(2**31),
                        )
                    )
        algos = [AlgoSpec(a.get("low", "xg"), a.get("weight")) for a in raw.get("algorithms", [{"low": "xg"}])]
        return cls(
            instances, algos, float(raw.get("per_run_timeout", 300.0)), seed, raw.get("test_budget")
        )

    @classmethod
    def load(cls, filename: str) -> "ExperimentConfig":
        with open(filename) as fh:
            return cls.from_json(fh.read(), os.path.dirname(os.path.abspath(filename)))


def random_instance(size: int, n: int, seed: int, density: float = 0.0) -> Instance:
    """Seeded square grid with random obstacles and ``n`` start/goal pairs.

    Starts are pairwise distinct, goals are pairwise distinct, and all lie in
    the largest connected region so every agent can reach its goal alone.
    """
    rng = random.Random(seed)
    for _ in range(1000):
        blocked = frozenset(
            (x, y) for y in range(size) for x in range(size) if rng.random() < density
        )
        if len(blocked) == size * size:
            continue
        world = GridWorld(size, size, blocked)
        region = _largest_region(world)
        if len(region) < n:
            continue
        starts = rng.sample(region, n)
        goals = rng.sample(region, n)
        return Instance.from_pairs(world, zip(starts, goals))
    raise ValueError(f"cannot place {n} agents on a {size}x{size} grid at density {density}")


def _largest_region(world: GridWorld) -> list:
    seen: set = set()
    best: list = []
    for c in world.cells:
        if c in seen:
            continue
        dist = goal_distance_field(world, c)
        comp = [v for v in world.cells if dist[v] != INF]
        seen.update(comp)
        if len(comp) > len(best):
            best = comp
    return best


# -- protocol ------------------------------------------------------------------


@dataclass(frozen=True)
class RunRecord:
    instance_id: str
    grid: str
    agents: int
    algorithm: str
    phase: str
    outcome: str
    bound: float
    index: Optional[int] = None
    sum_of_costs: Optional[int] = None
    avg_cost: Optional[float] = None
    makespan: Optional[int] = None
    wall_time: float = 0.0
    expanded: int = 0

    @property
    def solved(self) -> bool:
        return self.outcome == SOLVED

    def row(self) -> dict:
        d = asdict(self)
        d["bound"] = "inf" if self.bound == INF else int(self.bound)
        return {k: ("" if d[k] is None else d[k]) for k in RECORD_COLUMNS}


@dataclass
class ProtocolOutcome:
    baseline: RunRecord
    first: RunRecord
    best: RunRecord
    # every XG-CBS attempt in order, including the final failed one
    attempts: list = field(default_factory=list)

    def records(self) -> list:
        return [self.baseline, self.first, self.best]


def _record(result: SolveResult, inst: Instance, instance_id: str, algorithm: str,
            phase: str, bound: float) -> RunRecord:
    grid = f"{inst.world.width}x{inst.world.height}"
    base = RunRecord(instance_id, grid, inst.n, algorithm, phase, result.status, bound,
                     wall_time=result.stats.wall_time, expanded=result.stats.expanded)
    sol = result.solution
    if sol is None:
        return base
    soc = sol.sum_of_costs
    return replace(
        base,
        index=sol.index,
        sum_of_costs=soc,
        avg_cost=soc / inst.n if inst.n else 0.0,
        makespan=sol.plan.makespan,
    )


def run_baseline(inst: Instance, timeout: Optional[float], budget: Optional[int] = None,
                 instance_id: str = "") -> RunRecord:
    res = solve_cbs(inst, timeout=None if budget else timeout, max_expansions=budget)
    return _record(res, inst, instance_id, "cbs", "baseline", INF)


def run_protocol(inst: Instance, algo: AlgoSpec = AlgoSpec(), timeout: Optional[float] = 300.0,
                 budget: Optional[int] = None, instance_id: str = "",
                 baseline: Optional[RunRecord] = None) -> ProtocolOutcome:
    """CBS baseline, XG-CBS at the baseline's index, then lower the bound until failure.

    ``budget`` switches every run from wall-clock ``timeout`` to a cap on
    constraint-tree expansions. A bound that would drop below 1 counts as an
    unsolvable attempt without running anything.
    """
    if baseline is None:
        baseline = run_baseline(inst, timeout, budget, instance_id)
    wall = None if budget else timeout

    def attempt(bound, phase):
        if bound < 1:
            return RunRecord(instance_id, baseline.grid, inst.n, algo.algorithm_id, phase,
                             UNSOLVABLE, bound)
        res = solve_xg_cbs(inst, bound, algo.low, wall, weight=algo.weight, max_expansions=budget)
        log.info("%s %s bound=%s -> %s", instance_id, algo.algorithm_id, bound, res.status)
        return _record(res, inst, instance_id, algo.algorithm_id, phase, bound)

    bound = baseline.index if baseline.solved else INF
    first = attempt(bound, "first")
    attempts = [first]
    best = replace(first, phase="best")
    while best.solved:
        nxt = attempt(best.index - 1, "best")
        attempts.append(nxt)
        if not nxt.solved:
            break
        best = nxt
    return ProtocolOutcome(baseline, first, best, attempts)


# -- suites --------------------------------------------------------------------


def _run_instance(spec: InstanceSpec, algos: tuple, timeout: float, budget: Optional[int]) -> list:
    inst = spec.load()
    iid = spec.instance_id
    baseline = run_baseline(inst, timeout, budget, iid)
    out = [baseline]
    for algo in algos:
        res = run_protocol(inst, algo, timeout, budget, iid, baseline)
        out.extend([res.first, res.best])
    return out


def _sort_key(rec: RunRecord):
    return (rec.instance_id, rec.algorithm, PHASES.index(rec.phase))


def run_suite(config: ExperimentConfig, jobs: int = 1) -> list:
    """Every protocol of the suite; records sorted by (instance, algorithm, phase)."""
    args = [(s, tuple(config.algorithms), config.per_run_timeout, config.test_budget)
            for s in config.instances]
    records: list = []
    if jobs <= 1:
        for a in args:
            records.extend(_run_instance(*a))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for recs in pool.map(_run_instance, *zip(*args)):
                records.extend(recs)
    return sorted(records, key=_sort_key)


# -- tables --------------------------------------------------------------------


def _mean(xs) -> Optional[float]:
    return statistics.fmean(xs) if xs else None


def aggregate(records) -> list:
    """Per (grid, agents, algorithm, phase): success rate and means over solved runs only."""
    groups = defaultdict(list)
    for r in records:
        groups[(r.grid, r.agents, r.algorithm, r.phase)].append(r)
    rows = []
    for (grid, agents, algorithm, phase), recs in sorted(
        groups.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2], PHASES.index(kv[0][3]))
    ):
        ok = [r for r in recs if r.solved]
        rows.append({
            "grid": grid,
            "agents": agents,
            "algorithm": algorithm,
            "phase": phase,
            "runs": len(recs),
            "solved": len(ok),
            "success_rate": len(ok) / len(recs),
            "mean_index": _mean([r.index for r in ok]),
            "mean_avg_cost": _mean([r.avg_cost for r in ok]),
            "mean_time": _mean([r.wall_time for r in ok]),
        })
    return rows


def _csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: ("" if row[k] is None else row[k]) for k in columns})
    return buf.getvalue()


def records_csv(records) -> str:
    return _csv([r.row() for r in records], RECORD_COLUMNS)


def summary_csv(records) -> str:
    return _csv(aggregate(records), SUMMARY_COLUMNS)


def read_records_csv(text: str) -> list:
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        def opt(k, cast):
            return cast(row[k]) if row[k] != "" else None

        out.append(RunRecord(
            row["instance_id"], row["grid"], int(row["agents"]), row["algorithm"], row["phase"],
            row["outcome"], INF if row["bound"] == "inf" else int(row["bound"]),
            opt("index", int), opt("sum_of_costs", int), opt("avg_cost", float),
            opt("makespan", int), float(row["wall_time"]), int(row["expanded"]),
        ))
    return out
