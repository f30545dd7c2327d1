#!/usr/bin/env python3
"""Full verification pass: oracle vs closed forms, optimality residuals,
and a seeded end-to-end simulation check.

Exit status 0 means every check passed its tolerance; 1 otherwise.
"""

import argparse
import math
import sys
import time

import numpy as np

from wpir.cli import main as cli_main
from wpir.leakage import total_variation, uniform_distribution
from wpir.optimizer import CostProfile, optimal_distribution
from wpir.protocol import random_store, simulate, verify_decodability
from wpir.schemes import SchemeParams, build_structure


def protocol_checks(n_stores: int, trials: int) -> bool:
    params_list = [SchemeParams.tsc(3, 2), SchemeParams.alternative(4, 2, 2)]
    t0 = time.time()
    for params in params_list:
        for theta in range(1, params.n_messages + 1):
            verify_decodability(build_structure(params, theta), n_stores=n_stores, seed=theta)
    print(f"decodability: all options round-trip against {n_stores} stores "
          f"({time.time() - t0:.1f}s)")

    params = SchemeParams.tsc(3, 2)
    structures = [build_structure(params, t) for t in (1, 2)]
    store = random_store(params, 0)
    profile = CostProfile.from_params(params)
    target = optimal_distribution(profile, 7 / 6, 1.0).probs
    report = simulate(store, structures, target, n_trials=trials, seed=1)
    cost_err = abs(report.empirical_cost - 7 / 6)
    tv = total_variation(report.option_counts / trials, target)
    print(f"simulation: |D_emp - 7/6| = {cost_err:.2e}, option TV = {tv:.2e}")

    uniform = uniform_distribution(9)
    r1 = simulate(store, structures, uniform, n_trials=trials, seed=2, prior=[1, 0])
    r2 = simulate(store, structures, uniform, n_trials=trials, seed=3, prior=[0, 1])
    worst_tv = 0.0
    for db in range(3):
        queries = sorted(set(r1.per_db_query_counts[db]) | set(r2.per_db_query_counts[db]))
        a = np.array([r1.per_db_query_counts[db].get(q, 0) for q in queries]) / trials
        b = np.array([r2.per_db_query_counts[db].get(q, 0) for q in queries]) / trials
        worst_tv = max(worst_tv, 0.5 * float(np.abs(a - b).sum()))
    print(f"uniform-distribution privacy: worst per-database query TV = {worst_tv:.2e}")
    return cost_err <= 0.005 and tv <= 0.01 and worst_tv <= 0.01


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=6)
    parser.add_argument("--stores", type=int, default=200)
    parser.add_argument("--trials", type=int, default=200_000)
    args = parser.parse_args()

    code = cli_main(["verify", "--grid", "default", "--points", str(args.points)])
    ok = code == 0 and protocol_checks(args.stores, args.trials)
    print("verification:", "PASS" if ok else "FAIL")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
