#!/usr/bin/env python3
"""Generate the plot-ready CSV data sets for the standard examples.

Writes, under the output directory (default ./figure_data):

* tradeoff_tsc_n{3,4}_k2.csv        leakage vs download cost, orders 1/2/inf
* tradeoff_compare_n3_k2.csv        both schemes side by side (raw + normalized)
* tradeoff_compare_n4_k2.csv        full-length scheme vs L=1 and L=2 variants
* low_cost_probability_n{3,4}_k2.csv  leakage and cost as functions of the
                                      probability assigned to a low-cost option
* maximal_leakage_n3_k2.csv         maximal-leakage tradeoff for both schemes
* crossovers_n4_k2.csv              crossover costs per message length/metric

Each CSV is plottable as-is; no plotting backend is required here.
"""

import argparse
import csv
import math
from pathlib import Path

import numpy as np

from wpir.optimizer import (
    CostProfile,
    find_crossover,
    points_to_csv,
    sweep_tradeoff,
    tradeoff_leakage,
)
from wpir.schemes import SchemeParams

ORDERS = [1.0, 2.0, math.inf]


def write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")
    print(f"wrote {path}")


def low_cost_probability_view(params: SchemeParams, n_points: int) -> str:
    """Leakage and cost parameterized by the probability of one low-cost option."""
    profile = CostProfile.from_params(params)
    m, n, ell = profile.n_options, profile.n_low, profile.message_len
    rows = []
    for a in np.linspace(1.0 / m, 1.0 / n, n_points):
        a = float(a)
        lam = 1.0 - n * a
        download = 1.0 + lam / ell
        row = [f"{a!r}", f"{download!r}"]
        row += [f"{tradeoff_leakage(profile, download, o)!r}" for o in ORDERS]
        rows.append(row)
    header = ["p_low", "D"] + [f"leakage_nats_alpha_{o:g}" for o in ORDERS]
    lines = [",".join(header)] + [",".join(r) for r in rows]
    return "\n".join(lines) + "\n"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("-o", "--output-dir", default="figure_data")
    parser.add_argument("--points", type=int, default=200)
    args = parser.parse_args()
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    for n in (3, 4):
        profile = CostProfile.from_params(SchemeParams.tsc(n, 2))
        pts = sweep_tradeoff(profile, ORDERS, args.points)
        write(out / f"tradeoff_tsc_n{n}_k2.csv", points_to_csv(pts))
        write(
            out / f"low_cost_probability_n{n}_k2.csv",
            low_cost_probability_view(SchemeParams.tsc(n, 2), args.points),
        )

    pts = []
    for params in (SchemeParams.tsc(3, 2), SchemeParams.alternative(3, 2, 1)):
        pts += sweep_tradeoff(CostProfile.from_params(params), ORDERS, args.points)
    write(out / "tradeoff_compare_n3_k2.csv", points_to_csv(pts))

    pts = []
    for params in (
        SchemeParams.tsc(4, 2),
        SchemeParams.alternative(4, 2, 1),
        SchemeParams.alternative(4, 2, 2),
    ):
        pts += sweep_tradeoff(CostProfile.from_params(params), ORDERS, args.points)
    write(out / "tradeoff_compare_n4_k2.csv", points_to_csv(pts))

    pts = []
    for params in (SchemeParams.tsc(3, 2), SchemeParams.alternative(3, 2, 1)):
        pts += sweep_tradeoff(
            CostProfile.from_params(params), [1.0], args.points,
            include_maximal_leakage=True,
        )
    write(out / "maximal_leakage_n3_k2.csv", points_to_csv(pts))

    rows = [["L", "metric", "alpha", "d_star"]]
    for ell in (1, 2):
        for metric in ("renyi", "normalized", "maximal"):
            for order in ([1.0, 2.0, math.inf] if metric != "maximal" else [1.0]):
                res = find_crossover(4, 2, ell, order=order, metric=metric)
                rows.append([
                    str(ell), metric, f"{order:g}" if order != math.inf else "inf",
                    repr(res.d_star) if res.exists else "",
                ])
    buf = "\n".join(",".join(r) for r in rows) + "\n"
    write(out / "crossovers_n4_k2.csv", buf)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
