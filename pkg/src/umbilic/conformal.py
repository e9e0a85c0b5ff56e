"""Conformal change of metric by the inverse squared distance factor:
scalar curvature of rho^{-2} g, its density against the original volume,
leading-order extraction near the distinguished point, and the
L^1-integrability classifier with a numeric annulus probe."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import obstruction
from .numdiff import power_law_fit
from .polyjet import SphericalSeries
from .surface import GraphSurface, point_geometry

INTEGRABLE = "integrable"
NOT_INTEGRABLE = "not_integrable"
INCONCLUSIVE = "inconclusive"


def conformal_scalar(S: GraphSurface, x) -> float:
    """Scalar curvature of rho^{-2} g at the surface point over x:
    rho^2 (R_g + 4(n-1) H eta / rho + 4 n (n-1) eta^2 / rho^2)."""
    x = np.asarray(x, dtype=float)
    if float(x @ x) == 0.0:
        raise ValueError("the conformal factor is singular at the origin")
    n = S.n
    geo = point_geometry(S, x)
    return geo.rho**2 * (
        geo.R_g
        + 4.0 * (n - 1) * geo.H * geo.eta / geo.rho
        + 4.0 * n * (n - 1) * geo.eta**2 / geo.rho**2
    )


def curvature_density_factor(S: GraphSurface, x) -> float:
    """Density of (scalar curvature) x (volume) of the conformal metric
    against the original volume element: rho^{2-n} (R_g + ...)."""
    x = np.asarray(x, dtype=float)
    geo = point_geometry(S, x)
    return geo.rho ** (-S.n) * conformal_scalar(S, x)


@dataclass
class LeadingOrder:
    """Lowest nonvanishing order of the curvature expansion: the quantity
    behaves like c(theta) |x|^k + o(|x|^k) near the point."""

    k: Optional[int]
    c: Optional[SphericalSeries]  # total-order-0 representation of c(theta)
    is_zero: bool

    def to_json(self) -> dict:
        from .polyjet import poly_to_json

        out = {"is_zero": self.is_zero, "k": self.k}
        if self.c is not None:
            out["c"] = [
                {"radial_power": m, "poly": poly_to_json(P)} for m, P in self.c.terms
            ]
        return out


def leading_order_of_R(S: GraphSurface, W: int = 3) -> LeadingOrder:
    """Leading order of the expansion of the curvature quantity around the
    umbilical point, from the exact symbolic series through total order W."""
    if not S.symbolic:
        raise ValueError("leading-order extraction needs a symbolic surface")
    series = obstruction.script_R_series(S.f_jet, W)
    if series.is_zero:
        return LeadingOrder(None, None, True)
    k = series.leading_order()
    return LeadingOrder(k, series.coefficient(k), False)


def classify_integrability(n: int, L: LeadingOrder) -> str:
    """Near-point L^1 integrability of the conformal curvature density:
    integrable iff the leading order k satisfies k > n - 4."""
    if L.is_zero:
        return INCONCLUSIVE
    return INTEGRABLE if L.k > n - 4 else NOT_INTEGRABLE


@dataclass
class IntegrabilityProbe:
    radii: list
    shell_values: list  # approximate shell integrals of |density|
    slope: float
    r_squared: float
    verdict: str


def probe_directions(n: int, count: int = 32, seed: int = 0) -> np.ndarray:
    """Deterministic unit directions: the coordinate axes plus seeded
    pseudo-random points."""
    axes = np.vstack([np.eye(n), -np.eye(n)])
    rng = np.random.default_rng(seed)
    extra = rng.standard_normal((count, n))
    extra /= np.linalg.norm(extra, axis=1)[:, None]
    return np.vstack([axes, extra])


def integrability_probe(
    S: GraphSurface,
    radii: Sequence[float] = (1e-1, 10**-1.75, 10**-2.5, 10**-3.25, 1e-4),
    seed: int = 0,
) -> IntegrabilityProbe:
    """Numeric divergence test: the shell integral of |density| at radius s
    scales like s^{k+3-n}; the annulus integral converges iff the log-log
    slope exceeds -1.  Slopes within 0.1 of -1 are treated as divergent
    (marginal orders diverge logarithmically)."""
    dirs = probe_directions(S.n)
    area = obstruction.sphere_area(S.n)
    shells = []
    for s in sorted(radii, reverse=True):
        vals = [abs(curvature_density_factor(S, s * d)) for d in dirs]
        shells.append(float(np.mean(vals)) * area * s ** (S.n - 1))
    rs = sorted(radii, reverse=True)
    if max(shells) < 1e-13:
        return IntegrabilityProbe(list(rs), shells, 0.0, 1.0, INCONCLUSIVE)
    slope, _, r2 = power_law_fit(rs, shells)
    verdict = INTEGRABLE if slope > -0.9 else NOT_INTEGRABLE
    return IntegrabilityProbe(list(rs), shells, slope, r2, verdict)
