"""Cooperative optimum versus the repaired independent baseline on random clusters.

    python scripts/dominance_sweep.py [--seed 2024] [--instances 1000]

Prints the number of violations, the spread of reduction fractions and the
wall time.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from stratgrid import dispatch, randomized


def sweep(seed: int, instances: int):
    rng = np.random.default_rng(seed)
    violations, reductions = [], []
    for k in range(instances):
        scenario, profiles = randomized.dominance_instance(rng)
        coop = dispatch.solve_cooperative(scenario, profiles).objective_wh
        indep = dispatch.independent_baseline(scenario, profiles).repaired_objective_wh
        if coop > indep + 1e-9 * max(1.0, indep):
            violations.append((k, coop, indep))
        if indep > 0:
            reductions.append(1.0 - coop / indep)
    return violations, np.array(reductions)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--instances", type=int, default=1000)
    args = parser.parse_args()
    start = time.perf_counter()
    violations, red = sweep(args.seed, args.instances)
    elapsed = time.perf_counter() - start
    print(f"instances: {args.instances}")
    print(f"violations: {len(violations)}")
    for k, coop, indep in violations[:10]:
        print(f"  #{k}: cooperative {coop:.6f} Wh > independent {indep:.6f} Wh")
    print(f"reduction min/median/max: {red.min():.4f} / {np.median(red):.4f} / {red.max():.4f}")
    print(f"elapsed_s: {elapsed:.1f}")
    return 1 if violations else 0


if __name__ == "__main__":
    raise SystemExit(main())
