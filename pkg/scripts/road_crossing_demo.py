"""Solve the four-agent road crossing with CBS and XG-CBS and draw both plans.

    python3 scripts/road_crossing_demo.py [out_dir]

CBS returns the shortest plan, which needs several segments to explain;
XG-CBS at bound 1 returns a plan that reads as a single picture.
"""
import os
import sys

from xmapf.highlevel import solve_cbs, solve_xg_cbs
from xmapf.render import render_explanation, write_explanation
from xmapf.world import parse_map, parse_scenario, render_ascii

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, os.pardir, "data")


def load():
    with open(os.path.join(DATA, "road_crossing.map")) as fh:
        world = parse_map(fh.read())
    with open(os.path.join(DATA, "road_crossing.scen")) as fh:
        return parse_scenario(fh.read(), world, 4)


def main(out_dir="road_crossing_out"):
    inst = load()
    print(render_ascii(inst))
    for name, res in (("cbs", solve_cbs(inst, timeout=60)),
                      ("xg-cbs", solve_xg_cbs(inst, 1, "xg", timeout=60))):
        if not res.solved:
            print(f"{name}: {res.status}")
            continue
        sol = res.solution
        print(f"{name}: index={sol.index} sum_of_costs={sol.sum_of_costs} "
              f"time={res.stats.wall_time:.3f}s breakpoints={list(sol.decomposition.breakpoints)}")
        docs = render_explanation(sol.plan, sol.decomposition, inst.world)
        for f in write_explanation(docs, os.path.join(out_dir, name)):
            print("  " + f)


if __name__ == "__main__":
    main(*sys.argv[1:])
