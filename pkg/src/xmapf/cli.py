"""Command-line entry point: ``xmapf {solve,segment,render,bench}``.

Exit codes: 0 success, 2 no solution at the bound (complete planner),
3 not found (incomplete planner) or timeout, 4 input error.
Set ``XMAPF_LOG`` to a logging level name (e.g. ``INFO``) for progress output.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .bench import ExperimentConfig, records_csv, run_suite, summary_csv
from .core import load_plan, plan_to_json, plan_to_text
from .highlevel import UNSOLVABLE, solve_cbs, solve_xg_cbs
from .lowlevel import PLANNER_NAMES, XgOptions
from .render import RenderError, RenderSpec, render_explanation, write_explanation
from .segmentation import CollidingPlanError, boundary_witnesses, greedy_decompose
from .world import INF, MapFormatError, parse_map, parse_scenario

EXIT_OK = 0
EXIT_NO_SOLUTION = 2
EXIT_NOT_FOUND = 3
EXIT_INPUT = 4

log = logging.getLogger("xmapf")


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which would clash with "no solution"
    def error(self, message):
        raise InputError(message)


def _bound(text: str) -> float:
    if text.lower() in ("inf", "infinity", "none"):
        return INF
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bound must be a positive integer or 'inf', got {text!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="xmapf", description="Explainable multi-agent path finding via segmentation.")
    p.add_argument("--seed", type=int, default=0, help="seed for every random choice (default 0)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="plan paths for a scenario")
    s.add_argument("--map", required=True, help="MovingAI .map file")
    s.add_argument("--scen", required=True, help="MovingAI .scen file")
    s.add_argument("--agents", type=int, required=True, help="use the first N scenario rows")
    s.add_argument("--algo", choices=("cbs", "xg-cbs"), default="xg-cbs")
    s.add_argument("--low-level", choices=PLANNER_NAMES, default="xg",
                   help="low-level planner for xg-cbs")
    s.add_argument("--weight", type=float, help="weight w in (0,1) for --low-level wxg")
    s.add_argument("--bound", type=_bound, default=INF, help="maximum index r (integer >= 1 or 'inf')")
    s.add_argument("--timeout", type=float, default=300.0, help="wall-clock limit in seconds")
    s.add_argument("--test-budget", type=int,
                   help="cap on constraint-tree expansions instead of the wall-clock limit")
    s.add_argument("--seg-branch", choices=("all-boundaries", "first-boundary"), default="all-boundaries",
                   help="branch on every segment boundary or only the first")
    s.add_argument("--no-cycle-pruning", action="store_true", help="disable cycle elimination in XG-A*")
    s.add_argument("--no-fallback", action="store_true",
                   help="disable the shortest-path completion once the index budget is spent")
    s.add_argument("--bound-b", type=int, help="maximum number of vertices per low-level path")
    s.add_argument("--plan-out", help="write the plan as text (or JSON if the name ends in .json)")
    s.add_argument("--render-out", help="directory for per-segment SVG images")
    s.add_argument("--stats-json", help="write search statistics as JSON")

    g = sub.add_parser("segment", help="decompose a plan and list its breakpoints")
    g.add_argument("plan", help="plan file (text or JSON)")

    r = sub.add_parser("render", help="draw a plan segment by segment")
    r.add_argument("plan", help="plan file (text or JSON)")
    r.add_argument("--map", required=True, help="MovingAI .map file")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--cell", type=int, default=40, help="cell size in pixels")

    b = sub.add_parser("bench", help="run a benchmark suite")
    b.add_argument("--suite", required=True, help="suite JSON file")
    b.add_argument("--out", required=True, help="CSV with one row per run")
    b.add_argument("--summary", help="aggregated CSV (default: <out>_summary.csv)")
    b.add_argument("--jobs", type=int, default=1, help="worker processes")
    b.add_argument("--timeout", type=float, help="override the suite's per-run timeout")
    b.add_argument("--test-budget", type=int,
                   help="cap on constraint-tree expansions instead of wall-clock timeouts")
    return p


def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}")


def _cmd_solve(args) -> int:
    if args.bound != INF and args.bound < 1:
        raise InputError("--bound must be at least 1")
    if args.agents < 0:
        raise InputError("--agents must be non-negative")
    if args.bound_b is not None and args.bound_b < 1:
        raise InputError("--bound-b must be at least 1")
    if args.low_level == "wxg" and args.weight is None:
        raise InputError("--low-level wxg needs --weight")
    if args.weight is not None and not 0 < args.weight < 1:
        raise InputError("--weight must lie strictly between 0 and 1")
    world = parse_map(_read(args.map))
    inst = parse_scenario(_read(args.scen), world, args.agents)
    timeout = None if args.test_budget else args.timeout
    if args.algo == "cbs":
        res = solve_cbs(inst, timeout, args.test_budget, args.bound_b)
        planner = "astar"
    else:
        opts = XgOptions(eliminate_cycles=not args.no_cycle_pruning,
                         fallback_after_budget=not args.no_fallback)
        res = solve_xg_cbs(
            inst, args.bound, args.low_level, timeout, weight=args.weight, xg_options=opts,
            max_expansions=args.test_budget, length_bound=args.bound_b, seg_branch=args.seg_branch,
        )
        planner = args.low_level
    stats = {"status": res.status, "algorithm": res.algorithm, "bound": None if res.bound == INF else res.bound}
    stats.update(res.stats.as_dict())
    if res.solution is not None:
        sol = res.solution
        stats.update(index=sol.index, sum_of_costs=sol.sum_of_costs,
                     makespan=sol.plan.makespan, breakpoints=list(sol.decomposition.breakpoints))
    if args.stats_json:
        with open(args.stats_json, "w") as fh:
            json.dump(stats, fh, indent=2)
    if not res.solved:
        print(f"{res.status}: {res.algorithm} bound={args.bound} time={res.stats.wall_time:.3f}s "
              f"expanded={res.stats.expanded}")
        return EXIT_NO_SOLUTION if res.status == UNSOLVABLE else EXIT_NOT_FOUND
    sol = res.solution
    print(f"solved: algo={res.algorithm} planner={planner} index={sol.index} "
          f"sum_of_costs={sol.sum_of_costs} time={res.stats.wall_time:.3f}s expanded={res.stats.expanded}")
    if args.plan_out:
        text = plan_to_json(sol.plan) if args.plan_out.endswith(".json") else plan_to_text(sol.plan)
        with open(args.plan_out, "w") as fh:
            fh.write(text)
    if args.render_out:
        docs = render_explanation(sol.plan, sol.decomposition, world)
        write_explanation(docs, args.render_out)
    return EXIT_OK


def _cmd_segment(args) -> int:
    plan = load_plan(_read(args.plan))
    d = greedy_decompose(plan)
    print("breakpoints: " + " ".join(str(t) for t in d.breakpoints))
    print(f"index: {d.index}")
    for k, (a, b) in enumerate(d.windows(), start=1):
        print(f"segment {k}: [{a},{b})")
    if d.index > 1:
        for w in boundary_witnesses(plan, d):
            print(f"witness {w.boundary}: agent {w.i} at ({w.cell[0]},{w.cell[1]}) t={w.time_i}; "
                  f"agent {w.j} at t={w.time_j}")
    return EXIT_OK


def _cmd_render(args) -> int:
    if args.cell < 1:
        raise InputError("--cell must be positive")
    world = parse_map(_read(args.map))
    plan = load_plan(_read(args.plan))
    docs = render_explanation(plan, greedy_decompose(plan), world, RenderSpec(cell=args.cell))
    for fn in write_explanation(docs, args.out):
        print(fn)
    return EXIT_OK


def _cmd_bench(args) -> int:
    if args.jobs < 1:
        raise InputError("--jobs must be at least 1")
    try:
        raw = json.loads(_read(args.suite))
        raw.setdefault("seed", args.seed)
        if args.timeout is not None:
            raw["per_run_timeout"] = args.timeout
        if args.test_budget is not None:
            raw["test_budget"] = args.test_budget
        cfg = ExperimentConfig.from_json(json.dumps(raw), os.path.dirname(os.path.abspath(args.suite)))
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"bad suite file: {e}")
    records = run_suite(cfg, args.jobs)
    with open(args.out, "w") as fh:
        fh.write(records_csv(records))
    summary = args.summary or os.path.splitext(args.out)[0] + "_summary.csv"
    with open(summary, "w") as fh:
        fh.write(summary_csv(records))
    print(f"{len(records)} records -> {args.out}, summary -> {summary}")
    return EXIT_OK


def _setup_logging():
    level = os.environ.get("XMAPF_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    try:
        args = build_parser().parse_args(argv)
        handler = {
            "solve": _cmd_solve,
            "segment": _cmd_segment,
            "render": _cmd_render,
            "bench": _cmd_bench,
        }[args.command]
        return handler(args)
    except (InputError, MapFormatError, CollidingPlanError, RenderError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as e:
        # malformed plan files and invalid instances surface as ValueError
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
