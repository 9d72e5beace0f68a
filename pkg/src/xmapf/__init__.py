"""Multi-agent path finding with plans that decompose into few vertex-disjoint segments."""
from .core import Path, Plan, first_collision
from .highlevel import Solution, SolveResult, solve_cbs, solve_xg_cbs
from .segmentation import Decomposition, greedy_decompose
from .world import INF, AgentTask, GridWorld, Instance, parse_map, parse_scenario

__all__ = [
    "INF",
    "AgentTask",
    "Decomposition",
    "GridWorld",
    "Instance",
    "Path",
    "Plan",
    "Solution",
    "SolveResult",
    "first_collision",
    "greedy_decompose",
    "parse_map",
    "parse_scenario",
    "solve_cbs",
    "solve_xg_cbs",
]

__version__ = "0.1.0"
