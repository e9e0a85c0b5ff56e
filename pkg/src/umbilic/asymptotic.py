"""Coordinate charts at infinity for the inverted graph hypersurface.

The surface is inverted through the distinguished point, so a neighborhood
of that point maps to a neighborhood of infinity.  Three charts appear:

  graph_x     the original graph coordinates x (near the point),
  inverted_y  y = x |x|^{-2} (the inversion itself),
  corrected_z z = y sqrt(1 - c / |y|^2) with c = H^2 / (2 n^2),

where H is the mean curvature at the point.  The corrected chart absorbs
the order-2 deviation of the metric, improving the decay rate to 4 when
the cubic coefficient of the height function vanishes.

The module computes the components of the rescaled metric rho^{-2} g in
each chart, both numerically (with the deviation from the flat metric in
closed form, so no precision is lost to cancellation at large radius) and
as an exact symbolic descending series in the radius.  A least-squares
decay-order estimator certifies the asymptotic flatness orders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .numdiff import power_law_fit
from .obstruction import _decompose_umbilical
from .polyjet import Jet, MultiPoly, SphericalSeries
from .surface import GraphSurface, umbilical_decompose

GRAPH_X = "graph_x"
INVERTED_Y = "inverted_y"
CORRECTED_Z = "corrected_z"
_KINDS = (GRAPH_X, INVERTED_Y, CORRECTED_Z)


class ChartDomainError(ValueError):
    """A point lies outside the chart's domain of definition."""


class ChartRequirementError(ValueError):
    """The corrected chart requires the cubic coefficient of the height
    function to vanish and a numeric mean curvature."""


# -- charts ------------------------------------------------------------------


@dataclass(frozen=True)
class Chart:
    """A named coordinate chart with forward/inverse maps to the graph
    coordinates x.  H is only used by the corrected chart."""

    kind: str
    n: int
    H: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown chart kind {self.kind!r}")

    @staticmethod
    def graph(n: int) -> "Chart":
        return Chart(GRAPH_X, n)

    @staticmethod
    def inverted(n: int) -> "Chart":
        return Chart(INVERTED_Y, n)

    @staticmethod
    def corrected(n: int, H) -> "Chart":
        return Chart(CORRECTED_Z, n, float(H))

    @property
    def c(self) -> float:
        """The radial correction constant H^2 / (2 n^2)."""
        return self.H * self.H / (2.0 * self.n * self.n)

    @property
    def singular_radius(self) -> float:
        """Radius in the intermediate inverted coordinates below which the
        corrected chart is undefined: sqrt(c) = H / (n sqrt(2))."""
        return math.sqrt(self.c)

    def y_radius(self, t: float) -> float:
        """Radius in the inverted coordinates of the sphere of chart radius
        t (identity except for the corrected chart, where r^2 = t^2 + c)."""
        if self.kind == CORRECTED_Z:
            return math.sqrt(t * t + self.c)
        return float(t)

    # -- point maps ----------------------------------------------------------

    def to_x_batch(self, pts: np.ndarray) -> np.ndarray:
        """Map chart points to graph coordinates x."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.kind == GRAPH_X:
            return pts
        s = np.sum(pts * pts, axis=1)
        if np.any(s <= 0.0):
            raise ChartDomainError("chart points must be nonzero")
        if self.kind == INVERTED_Y:
            return pts / s[:, None]
        # corrected: y = z sqrt(1 + c/t^2), |y|^2 = t^2 + c, x = y / |y|^2.
        scale = np.sqrt(1.0 + self.c / s) / (s + self.c)
        return pts * scale[:, None]

    def to_x(self, p) -> np.ndarray:
        return self.to_x_batch(np.asarray(p, dtype=float)[None, :])[0]

    def from_x_batch(self, xs: np.ndarray) -> np.ndarray:
        """Map graph coordinates x to chart points."""
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        if self.kind == GRAPH_X:
            return xs
        s = np.sum(xs * xs, axis=1)
        if np.any(s <= 0.0):
            raise ChartDomainError("the distinguished point maps to infinity")
        ys = xs / s[:, None]
        if self.kind == INVERTED_Y:
            return ys
        # |y|^2 = 1/|x|^2 must exceed c for a real square root.
        fac = 1.0 - self.c * s
        if np.any(fac <= 0.0):
            raise ChartDomainError(
                "point below the singular radius of the corrected chart"
            )
        return ys * np.sqrt(fac)[:, None]

    def from_x(self, x) -> np.ndarray:
        return self.from_x_batch(np.asarray(x, dtype=float)[None, :])[0]


def chart_for(S: GraphSurface, flag: str) -> Chart:
    """Resolve a chart flag ('x'/'y'/'z' or a kind name) for a surface.

    The corrected chart demands a symbolic surface with numeric mean
    curvature and vanishing cubic coefficient; violations raise
    ChartRequirementError (a usage error, not a verification failure).
    """
    if flag in ("x", GRAPH_X):
        return Chart.graph(S.n)
    if flag in ("y", INVERTED_Y):
        return Chart.inverted(S.n)
    if flag in ("z", CORRECTED_Z):
        if not S.symbolic:
            raise ChartRequirementError(
                "the corrected chart needs an explicit jet surface"
            )
        H, parts = umbilical_decompose(S)
        if isinstance(H, MultiPoly):
            raise ChartRequirementError(
                "the corrected chart needs a numeric mean curvature"
            )
        A3 = parts.get(3)
        if A3 is not None and not A3.is_zero:
            raise ChartRequirementError(
                "the corrected chart requires the cubic coefficient of the "
                "height function to vanish"
            )
        return Chart.corrected(S.n, float(H))
    raise ValueError(f"unknown chart flag {flag!r}")


# -- numeric metric components ----------------------------------------------
#
# In the inverted chart the rescaled metric has the closed form
#
#   g^y = (1 + s f^2)^{-2} (I + v v^T),   v = (I - 2 yhat yhat^T) grad f,
#
# with s = |y|^2 and f, grad f evaluated at x = y/s.  The deviation from
# the flat metric is assembled from the small quantities s f^2 and v
# directly, so its relative accuracy does not degrade as |y| grows.


def _deviation_inverted(S: GraphSurface, ys: np.ndarray) -> np.ndarray:
    n = S.n
    s = np.sum(ys * ys, axis=1)
    if np.any(s <= 0.0):
        raise ChartDomainError("chart points must be nonzero")
    xs = ys / s[:, None]
    fv = S.f_value_batch(xs)
    gr = S.f_grad_batch(xs)
    eps = s * fv * fv
    conf = 1.0 / ((1.0 + eps) * (1.0 + eps))
    confm1 = -eps * (2.0 + eps) * conf  # (1+eps)^{-2} - 1 without rounding
    yhat = ys / np.sqrt(s)[:, None]
    dots = np.sum(yhat * gr, axis=1)
    v = gr - 2.0 * dots[:, None] * yhat
    out = confm1[:, None, None] * np.eye(n)[None, :, :]
    out += conf[:, None, None] * v[:, :, None] * v[:, None, :]
    return out


def _deviation_corrected(S: GraphSurface, chart: Chart, zs: np.ndarray) -> np.ndarray:
    n = S.n
    t2 = np.sum(zs * zs, axis=1)
    if np.any(t2 <= 0.0):
        raise ChartDomainError("chart points must be nonzero")
    a = chart.c / t2
    phi = np.sqrt(1.0 + a)
    hy = _deviation_inverted(S, phi[:, None] * zs)
    zhat = zs / np.sqrt(t2)[:, None]
    gamma = a / (1.0 + a)
    # dy/dz = phi (I - gamma zhat zhat^T) is symmetric; conjugate the
    # inverted-chart metric and add the exact flat-part correction
    # (dy/dz)^2 - I = a I - (2a - a^2/(1+a)) zhat zhat^T.
    u = np.einsum("pij,pj->pi", hy, zhat)
    q = np.einsum("pi,pi->p", u, zhat)
    zz = zhat[:, :, None] * zhat[:, None, :]
    mid = (
        hy
        - gamma[:, None, None] * (zhat[:, :, None] * u[:, None, :] + u[:, :, None] * zhat[:, None, :])
        + (gamma * gamma * q)[:, None, None] * zz
    )
    out = ((1.0 + a))[:, None, None] * mid
    out += a[:, None, None] * np.eye(n)[None, :, :]
    out -= (2.0 * a - a * a / (1.0 + a))[:, None, None] * zz
    return out


def _deviation_graph(S: GraphSurface, xs: np.ndarray) -> np.ndarray:
    n = S.n
    s = np.sum(xs * xs, axis=1)
    fv = S.f_value_batch(xs)
    gr = S.f_grad_batch(xs)
    rho = s + fv * fv
    if np.any(rho <= 0.0):
        raise ChartDomainError("the rescaled metric is singular at the point")
    gg = np.eye(n)[None, :, :] + gr[:, :, None] * gr[:, None, :]
    return gg / (rho * rho)[:, None, None] - np.eye(n)[None, :, :]


def ghat_deviation_batch(S: GraphSurface, chart: Chart, pts: np.ndarray) -> np.ndarray:
    """Components of (rescaled metric - identity) at chart points, shape
    (N, n, n), accurate in a relative sense even where the deviation is
    tiny."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if chart.kind == INVERTED_Y:
        return _deviation_inverted(S, pts)
    if chart.kind == CORRECTED_Z:
        return _deviation_corrected(S, chart, pts)
    return _deviation_graph(S, pts)


def ghat_components(S: GraphSurface, chart: Chart, p) -> np.ndarray:
    """The full n x n matrix of the rescaled metric in the chart at p."""
    p = np.asarray(p, dtype=float)
    return np.eye(S.n) + ghat_deviation_batch(S, chart, p[None, :])[0]


# -- symbolic descending series ----------------------------------------------
#
# All series are exact SphericalSeries in the chart radius with windowed
# orders [order_min, 0]; coefficients may carry parameters (symbolic mean
# curvature and generic quartic/quintic coefficients).


def _require_no_cubic(parts: Dict[int, MultiPoly]) -> None:
    A3 = parts.get(3)
    if A3 is not None and not A3.is_zero:
        raise ChartRequirementError(
            "the expansion requires the cubic coefficient of the height "
            "function to vanish"
        )


def _series_pieces(poly: MultiPoly, LO: int):
    """Height function and its gradient at x = y / |y|^2 as descending
    series in |y|, plus the correction constant c = H^2/(2 n^2).

    The height series carries two extra orders because it is only used
    squared and multiplied by the square of the radius."""
    n = poly.n
    Hp, parts = _decompose_umbilical(poly)
    _require_no_cubic(parts)
    parts_all = poly.homogeneous_parts()
    f_terms = [(-2 * k, P) for k, P in parts_all.items()]
    f_ser = SphericalSeries.canonicalize(n, f_terms, LO - 2, 0)
    grads = []
    for i in range(n):
        g_terms = [(-2 * (k - 1), P.diff(i)) for k, P in parts_all.items()]
        grads.append(SphericalSeries.canonicalize(n, g_terms, LO, 0))
    c_poly = (Hp * Hp).scale(Fraction(1, 2 * n * n))
    return n, f_ser, grads, c_poly


def _y_metric_pieces(poly: MultiPoly, LO: int):
    """Conformal factor (1 + |y|^2 f^2)^{-2} and the reflected gradient
    v = (I - 2 yhat yhat^T) grad f as descending series."""
    n, f_ser, grads, c_poly = _series_pieces(poly, LO)
    one = SphericalSeries.one(n, LO, 0)
    eps = (f_ser * f_ser).shift(2).with_window(LO, 0)
    conf = (one + eps).power_unit(-2, at_infinity=True)
    rad = [
        SphericalSeries.from_term(-1, MultiPoly.var(n, i), LO, 0) for i in range(n)
    ]
    dot = SphericalSeries.zero(n, LO, 0)
    for i in range(n):
        dot = dot + rad[i] * grads[i]
    v = [grads[i] - (dot * rad[i]).scale(2) for i in range(n)]
    return n, one, conf, v, rad, c_poly


class _RadialSubstitution:
    """Composition with y = z sqrt(1 + c / t^2): a term r^m P(y) of total
    order w = m + deg P becomes t^m P(z) (1 + c t^{-2})^{w/2}."""

    def __init__(self, n: int, c_poly: MultiPoly, LO: int):
        self.n = n
        self.LO = LO
        terms = [(0, MultiPoly.const(n, 1))]
        if not c_poly.is_zero:
            terms.append((-2, c_poly))
        self.base = SphericalSeries.canonicalize(n, terms, LO, 0)
        self._powers: Dict[Fraction, SphericalSeries] = {}

    def power(self, e: Fraction) -> SphericalSeries:
        if e not in self._powers:
            self._powers[e] = self.base.power_unit(e, at_infinity=True)
        return self._powers[e]

    def __call__(self, series: SphericalSeries) -> SphericalSeries:
        out = SphericalSeries.zero(self.n, self.LO, 0)
        for m, P in series.terms:
            w = m + P.degree()
            term = SphericalSeries.from_term(m, P, self.LO, 0)
            out = out + term * self.power(Fraction(w, 2))
        return out


def inverse_conformal_profile(
    f: Jet, chart_kind: str = CORRECTED_Z, order_min: int = -5
) -> SphericalSeries:
    """The factor (1 + |y|^2 f^2)^{-2} = |x|^4 rho^{-2} as a descending
    series in the chart radius (starts 1 - c t^{-2} + ... in the corrected
    chart)."""
    LO = order_min
    n, one, conf, v, rad, c_poly = _y_metric_pieces(f.poly, LO)
    if chart_kind == INVERTED_Y:
        return conf
    sub = _RadialSubstitution(n, c_poly, LO)
    return sub(conf).with_window(order_min, 0)


def ghat_asymptotic_series(
    f: Jet, chart_kind: str = CORRECTED_Z, order_min: int = -5
) -> List[List[SphericalSeries]]:
    """Exact descending series of (rescaled metric - identity) components
    in the chart, through total order order_min.  Requires a vanishing
    cubic coefficient in the height function."""
    if chart_kind not in (INVERTED_Y, CORRECTED_Z):
        raise ValueError("series are available in the inverted charts only")
    LO = order_min
    n, one, conf, v, rad, c_poly = _y_metric_pieces(f.poly, LO)
    confm1 = conf - one
    hy = [
        [
            conf * v[i] * v[j] + (confm1 if i == j else SphericalSeries.zero(n, LO, 0))
            for j in range(n)
        ]
        for i in range(n)
    ]
    if chart_kind == INVERTED_Y:
        return [[hy[i][j].with_window(order_min, 0) for j in range(n)] for i in range(n)]
    sub = _RadialSubstitution(n, c_poly, LO)
    G = [
        [
            sub(hy[i][j]) + (one if i == j else SphericalSeries.zero(n, LO, 0))
            for j in range(n)
        ]
        for i in range(n)
    ]
    a_ser = SphericalSeries.canonicalize(n, [(-2, c_poly)], LO, 0)
    inv_base = sub.base.invert_unit(at_infinity=True)
    gamma = a_ser * inv_base
    # dy/dz = phi (I - gamma zhat zhat^T): conjugate via the radial vector.
    u = []
    for i in range(n):
        acc = SphericalSeries.zero(n, LO, 0)
        for j in range(n):
            acc = acc + G[i][j] * rad[j]
        u.append(acc)
    q = SphericalSeries.zero(n, LO, 0)
    for i in range(n):
        q = q + u[i] * rad[i]
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            entry = (
                G[i][j]
                - gamma * (rad[i] * u[j] + u[i] * rad[j])
                + gamma * gamma * q * rad[i] * rad[j]
            )
            entry = sub.base * entry
            if i == j:
                entry = entry - one
            row.append(entry.with_window(order_min, 0))
        out.append(row)
    return out


def ghat_radial_trace_series(
    f: Jet, chart_kind: str = CORRECTED_Z, order_min: int = -5
) -> Tuple[SphericalSeries, SphericalSeries]:
    """The radial component g_tt = sum g_ij zhat_i zhat_j and the trace
    sum g_ii of the full rescaled metric, as descending series.

    Uses that the corrected-chart Jacobian phi (I - gamma zhat zhat^T)
    fixes the radial direction, so only two scalar series are needed; this
    keeps symbolic runs with generic quartic/quintic coefficients cheap.
    """
    if chart_kind not in (INVERTED_Y, CORRECTED_Z):
        raise ValueError("series are available in the inverted charts only")
    LO = order_min
    n, one, conf, v, rad, c_poly = _y_metric_pieces(f.poly, LO)
    dot = SphericalSeries.zero(n, LO, 0)
    for i in range(n):
        dot = dot + v[i] * rad[i]
    S_rr = conf * (one + dot * dot)
    vv = SphericalSeries.zero(n, LO, 0)
    for i in range(n):
        vv = vv + v[i] * v[i]
    S_tr = conf * (one.scale(n) + vv)
    if chart_kind == INVERTED_Y:
        return S_rr.with_window(order_min, 0), S_tr.with_window(order_min, 0)
    sub = _RadialSubstitution(n, c_poly, LO)
    srr = sub(S_rr)
    stt = sub(S_tr)
    a_ser = SphericalSeries.canonicalize(n, [(-2, c_poly)], LO, 0)
    inv_base = sub.base.invert_unit(at_infinity=True)
    # The Jacobian scales the radial direction by phi (1 - gamma), whose
    # square is 1/(1+a); the trace picks up tr(G J^2).
    g_tt = inv_base * srr
    trace = sub.base * stt - a_ser * (one.scale(2) + a_ser) * inv_base * srr
    return g_tt.with_window(order_min, 0), trace.with_window(order_min, 0)


# -- numeric decay-order estimation -------------------------------------------


def decay_directions(n: int, count: int = 32, seed: int = 0) -> np.ndarray:
    """Deterministic angular grid: the signed coordinate axes plus seeded
    pseudo-random unit directions."""
    axes = np.vstack([np.eye(n), -np.eye(n)])
    rng = np.random.default_rng(seed)
    extra = rng.standard_normal((count, n))
    extra /= np.linalg.norm(extra, axis=1)[:, None]
    return np.vstack([axes, extra])


@dataclass
class DecayFit:
    """Power-law fit of the metric deviation and its first two derivatives
    against the chart radius; tau_hat = -slope of the deviation itself."""

    chart_kind: str
    radii: List[float]
    h_max: List[float]
    dh_max: List[float]
    ddh_max: List[float]
    slope_h: float
    slope_dh: float
    slope_ddh: float
    tau_hat: float
    r_squared: float

    def to_json(self) -> dict:
        return {
            "chart": self.chart_kind,
            "radii": list(self.radii),
            "max_h": list(self.h_max),
            "max_dh": list(self.dh_max),
            "max_ddh": list(self.ddh_max),
            "slope_h": self.slope_h,
            "slope_dh": self.slope_dh,
            "slope_ddh": self.slope_ddh,
            "tau_hat": self.tau_hat,
            "r_squared": self.r_squared,
        }

    def csv_rows(self) -> List[List[object]]:
        rows = [["radius", "max_h", "max_dh", "max_ddh"]]
        for r, a, b, c in zip(self.radii, self.h_max, self.dh_max, self.ddh_max):
            rows.append([r, a, b, c])
        return rows


def decay_order_estimate(
    S: GraphSurface,
    chart: Chart,
    radii: Sequence[float],
    seed: int = 0,
    fd_scale: float = 1e-4,
) -> DecayFit:
    """Fit log max|deviation| (and central-difference first and second
    derivatives in chart coordinates) against log radius on a fixed
    angular grid.  All magnitudes below 1e-14 reports tau_hat = inf."""
    radii = sorted(float(r) for r in radii)
    if len(radii) < 2:
        raise ValueError("at least two radii are required")
    n = S.n
    dirs = decay_directions(n, seed=seed)
    h_max, dh_max, ddh_max = [], [], []
    for r in radii:
        pts = r * dirs
        h = fd_scale * r
        base = ghat_deviation_batch(S, chart, pts)
        plus = []
        minus = []
        d1 = 0.0
        d2 = 0.0
        for k in range(n):
            e = np.zeros(n)
            e[k] = h
            p = ghat_deviation_batch(S, chart, pts + e)
            m = ghat_deviation_batch(S, chart, pts - e)
            plus.append(p)
            minus.append(m)
            d1 = max(d1, float(np.max(np.abs((p - m) / (2.0 * h)))))
            d2 = max(d2, float(np.max(np.abs((p - 2.0 * base + m) / (h * h)))))
        for k in range(n):
            for l in range(k + 1, n):
                ek = np.zeros(n)
                ek[k] = h
                el = np.zeros(n)
                el[l] = h
                pp = ghat_deviation_batch(S, chart, pts + ek + el)
                pm = ghat_deviation_batch(S, chart, pts + ek - el)
                mp = ghat_deviation_batch(S, chart, pts - ek + el)
                mm = ghat_deviation_batch(S, chart, pts - ek - el)
                d2 = max(
                    d2,
                    float(np.max(np.abs((pp - pm - mp + mm) / (4.0 * h * h)))),
                )
        h_max.append(float(np.max(np.abs(base))))
        dh_max.append(d1)
        ddh_max.append(d2)
    if max(h_max) < 1e-14:
        return DecayFit(
            chart.kind, radii, h_max, dh_max, ddh_max,
            -math.inf, -math.inf, -math.inf, math.inf, 1.0,
        )
    slope_h, _, r2 = power_law_fit(radii, h_max)
    slope_dh, _, _ = power_law_fit(radii, dh_max)
    slope_ddh, _, _ = power_law_fit(radii, ddh_max)
    return DecayFit(
        chart.kind,
        radii,
        h_max,
        dh_max,
        ddh_max,
        slope_h,
        slope_dh,
        slope_ddh,
        -slope_h,
        r2,
    )
