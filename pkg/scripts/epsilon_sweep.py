#!/usr/bin/env python3
"""Sweep epsilon and measure cost ratio vs. the brute-force optimum.

For each epsilon the reduction runs with real sampling on freshly
generated planted-outlier instances. Smaller epsilon buys a tighter loss
bound at the price of a larger candidate pool and more (Y, tau)
iterations; this script prints how the measured ratio, the iteration
count q and the wall time move along that tradeoff.

Example:
    python3 scripts/epsilon_sweep.py --instances 10 --epsilons 1.0 0.5 0.25
"""

import argparse
import statistics
import sys
import time

sys.path.insert(0, "src")

from outlier_reduce.gen import GeneratorConfig, generate_instance
from outlier_reduce.oracle import exact_outlier_opt
from outlier_reduce.reduction import ReductionConfig, ReductionInfeasible, run_reduction
from outlier_reduce.solvers import get_plugin


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--instances", type=int, default=10)
    parser.add_argument("--epsilons", type=float, nargs="+",
                        default=[1.0, 0.5, 0.25])
    parser.add_argument("--n", type=int, default=10)
    parser.add_argument("--k", type=int, default=2)
    parser.add_argument("--m", type=int, default=2)
    parser.add_argument("--z", type=int, default=1, choices=(1, 2))
    parser.add_argument("--constraint", default="unconstrained")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    plugin = get_plugin("exact")
    cases = []
    for i in range(args.instances):
        cfg = GeneratorConfig(n=args.n, k=args.k, m=args.m, z=args.z,
                              constraint=args.constraint)
        inst = generate_instance(cfg, args.seed + i)
        opt, _ = exact_outlier_opt(inst)
        cases.append((inst, opt))

    print(f"{'epsilon':>8} {'mean ratio':>11} {'max ratio':>10} "
          f"{'mean q':>8} {'pool':>6} {'secs':>7}")
    for eps in args.epsilons:
        ratios, qs, pools = [], [], []
        started = time.perf_counter()
        for i, (inst, opt) in enumerate(cases):
            config = ReductionConfig(epsilon=eps, sampling="random",
                                     sample_seed=args.seed + 7919 * i)
            try:
                res = run_reduction(inst, config, plugin)
            except ReductionInfeasible:
                continue
            ratios.append(res.solution.cost / opt if opt > 0 else 1.0)
            qs.append(res.q)
            pools.append(len(res.pool.draws))
        elapsed = time.perf_counter() - started
        print(f"{eps:>8.3f} {statistics.mean(ratios):>11.6f} "
              f"{max(ratios):>10.6f} {statistics.mean(qs):>8.1f} "
              f"{statistics.mean(pools):>6.0f} {elapsed:>7.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
