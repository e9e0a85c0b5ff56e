#!/usr/bin/env python3
"""Sweep the mass integrals of the inverted builtin surfaces over a radius
schedule, extrapolate to infinity, and print a table.

Usage: python3 scripts/mass_sweep.py [--radii 10,31.6,100,316,1000]
"""

import argparse
import time

from umbilic import asymptotic, mass
from umbilic.surface import GraphSurface

CASES = [
    ("sphere", 3, "y", mass.STANDARD),
    ("sphere", 4, "y", mass.STANDARD),
    ("sphere", 5, "y", mass.STANDARD),
    ("quartic_x1", 6, "z", mass.LEE_PARKER),
    ("quartic_x1", 7, "z", mass.LEE_PARKER),
]


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--radii", default=None, help="comma-separated radii")
    args = ap.parse_args()
    radii = (
        [float(t) for t in args.radii.split(",")]
        if args.radii
        else list(mass.DEFAULT_RADII)
    )

    print(f"{'surface':<11} {'n':>2} {'chart':>5} {'formula':>12} "
          f"{'m_inf':>13} {'p':>6} {'R^2':>8} {'time':>7}")
    for name, n, chart_flag, formula in CASES:
        S = GraphSurface.builtin(name, n)
        chart = asymptotic.chart_for(S, chart_flag)
        t0 = time.monotonic()
        sweep = mass.mass_sweep(S, chart, radii, formula)
        fit = mass.extrapolate_mass(sweep)
        print(
            f"{name:<11} {n:>2} {chart_flag:>5} {formula:>12} "
            f"{fit.m_inf:>13.3e} {fit.decay_exponent:>6.2f} "
            f"{fit.fit_quality:>8.5f} {time.monotonic() - t0:>6.1f}s"
        )

    src = mass.SchwarzschildField(mass=1.0)
    from umbilic.quadrature import QuadratureRule

    rule = QuadratureRule.sphere(3, 8)
    for formula in (mass.STANDARD, mass.LEE_PARKER):
        sweep = mass.mass_sweep(src, None, radii, formula, rule)
        fit = mass.extrapolate_mass(sweep)
        print(
            f"{'schwarz m=1':<11} {3:>2} {'-':>5} {formula:>12} "
            f"{fit.m_inf:>13.6f} {fit.decay_exponent:>6.2f} "
            f"{fit.fit_quality:>8.5f}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
