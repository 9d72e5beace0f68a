"""Index reduction at scale: CBS against XG-CBS with SR-A* on random 33x33 grids.

    python3 scripts/scale_study.py [--seeds 10] [--agents 30] [--timeout 60]

For each seed: CBS, then XG-CBS(sr) with no bound, then once more with the
bound set one below the index it found. Prints one row per seed and the means.
"""
import argparse
from statistics import mean

from xmapf.bench import random_instance
from xmapf.highlevel import solve_cbs, solve_xg_cbs
from xmapf.world import INF


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--agents", type=int, default=30)
    ap.add_argument("--size", type=int, default=33)
    ap.add_argument("--density", type=float, default=0.0)
    ap.add_argument("--timeout", type=float, default=60.0)
    args = ap.parse_args(argv)

    cbs_idx, sr_idx = [], []
    print("seed  cbs        sr(inf)    sr(lowered)")
    for seed in range(args.seeds):
        inst = random_instance(args.size, args.agents, seed, args.density)
        cbs = solve_cbs(inst, timeout=args.timeout)
        sr = solve_xg_cbs(inst, INF, "sr", timeout=args.timeout)
        low = None
        if sr.solved and sr.solution.index > 1:
            low = solve_xg_cbs(inst, sr.solution.index - 1, "sr", timeout=args.timeout)
        if cbs.solved:
            cbs_idx.append(cbs.solution.index)
        if sr.solved:
            best = sr.solution.index
            if low is not None and low.solved:
                best = low.solution.index
            sr_idx.append(best)

        def cell(res):
            if res is None:
                return "-"
            return str(res.solution.index) if res.solved else res.status

        print(f"{seed:<5} {cell(cbs):<10} {cell(sr):<10} {cell(low)}")
    if cbs_idx and sr_idx:
        print(f"cbs: solved {len(cbs_idx)}, mean index {mean(cbs_idx):.2f}")
        print(f"sr:  solved {len(sr_idx)}, mean index {mean(sr_idx):.2f} "
              f"({mean(sr_idx) / mean(cbs_idx):.0%} of cbs)")


if __name__ == "__main__":
    main()
