#!/usr/bin/env python3
"""Fit the decay order of the rescaled metric deviation for the builtin
surfaces in both inversion charts and print the fitted exponents.

Usage: python3 scripts/decay_sweep.py [--seed 0]
"""

import argparse

from umbilic import asymptotic, mass
from umbilic.surface import GraphSurface

CASES = [
    ("flat", 3, "y"),
    ("sphere", 3, "y"),
    ("sphere", 5, "y"),
    ("sphere", 7, "y"),
    ("cubic_x1", 5, "y"),
    ("quartic_x1", 6, "z"),
    ("quartic_x1", 7, "z"),
]


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"{'surface':<11} {'n':>2} {'chart':>5} {'tau_hat':>8} "
          f"{'slope_dh':>9} {'slope_ddh':>10} {'R^2':>8}")
    for name, n, chart_flag in CASES:
        S = GraphSurface.builtin(name, n)
        chart = asymptotic.chart_for(S, chart_flag)
        fit = asymptotic.decay_order_estimate(
            S, chart, mass.DEFAULT_RADII, seed=args.seed
        )
        print(
            f"{name:<11} {n:>2} {chart_flag:>5} {fit.tau_hat:>8.3f} "
            f"{fit.slope_dh:>9.3f} {fit.slope_ddh:>10.3f} {fit.r_squared:>8.5f}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
