"""Geometry of a graph hypersurface M = {(x, f(x))} in R^(n+1).

A surface is described by the height function f with f(0) = 0 and
grad f(0) = 0, either as an exact truncated jet (symbolic mode) or as a
black-box evaluator differentiated by finite differences (numeric mode).
All curvature quantities follow the graph formulas with the inner-pointing
normal normalized so that the sphere tangent at the origin has H = +n/R:

    g_ab  = delta_ab + f_a f_b
    II_ab = f_ab / sqrt(1 + |grad f|^2)
    H     = tr_g(II)
    rho   = |x|^2 + f^2
    eta   = (f - x . grad f) / sqrt(1 + |grad f|^2)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from . import numdiff
from .polyjet import Jet, MultiPoly, poly_divexact, poly_from_json, poly_to_json


class NotUmbilical(ValueError):
    """The quadratic part of f is not a scalar multiple of |x|^2."""


# -- fast batched polynomial evaluation -----------------------------------------


class BatchPoly:
    """Vectorized float evaluator for a parameter-free MultiPoly."""

    def __init__(self, P: MultiPoly):
        if P.param_names():
            raise ValueError("batch evaluation needs numeric coefficients")
        self.n = P.n
        exps = []
        coeffs = []
        for (e, _), c in P.terms.items():
            exps.append(e)
            coeffs.append(float(c))
        self.exps = np.array(exps, dtype=np.int64).reshape(-1, P.n)
        self.coeffs = np.array(coeffs)

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.coeffs.size == 0:
            return np.zeros(pts.shape[0])
        # (N, T) monomial values
        mono = np.prod(pts[:, None, :] ** self.exps[None, :, :], axis=2)
        return mono @ self.coeffs


# -- the surface ------------------------------------------------------------


@dataclass
class GraphSurface:
    """A hypersurface given as the graph of f over a neighborhood of 0."""

    n: int
    f_jet: Optional[Jet] = None
    f_num: Optional[Callable[[np.ndarray], float]] = None
    fd_step: float = 1e-5
    name: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if (self.f_jet is None) == (self.f_num is None):
            raise ValueError("exactly one of f_jet / f_num is required")
        if self.f_jet is not None:
            p = self.f_jet.poly
            if not p.homogeneous_part(0).is_zero or not p.homogeneous_part(1).is_zero:
                raise ValueError("f must satisfy f(0) = 0 and grad f(0) = 0")

    @property
    def symbolic(self) -> bool:
        return self.f_jet is not None

    # -- constructors ------------------------------------------------------

    @staticmethod
    def flat(n: int, order: int = 7) -> "GraphSurface":
        return GraphSurface(n, f_jet=Jet.const(n, 0, order), name="flat")

    @staticmethod
    def sphere(n: int, radius=Fraction(1), order: int = 7) -> "GraphSurface":
        """Graph of the radius-R sphere tangent to x_{n+1}=0 at the origin:
        f = R - sqrt(R^2 - |x|^2), expanded as an exact jet."""
        R = Fraction(radius)
        r2 = MultiPoly.x_norm_sq(n)
        u = Jet.of(MultiPoly.const(n, 1) - r2.scale(Fraction(1) / (R * R)), order)
        f = (Jet.const(n, 1, order) - u.power_unit(Fraction(1, 2))) * R
        return GraphSurface(n, f_jet=f, name=f"sphere(R={R})")

    @staticmethod
    def sphere_numeric(n: int, radius: float = 1.0, fd_step: float = 1e-5):
        R = float(radius)

        def f(x):
            x = np.asarray(x, dtype=float)
            return R - math.sqrt(R * R - float(np.dot(x, x)))

        return GraphSurface(n, f_num=f, fd_step=fd_step, name=f"sphere_num(R={R})")

    @staticmethod
    def polynomial(poly: MultiPoly, order: int = 7, name: str = "") -> "GraphSurface":
        return GraphSurface(poly.n, f_jet=Jet.of(poly, order), name=name or "poly")

    @staticmethod
    def quartic_x1(n: int, order: int = 7) -> "GraphSurface":
        p = MultiPoly.x_norm_sq(n).scale(Fraction(1, 2)) + MultiPoly.var(n, 0) ** 4
        return GraphSurface.polynomial(p, order, name="quartic_x1")

    @staticmethod
    def cubic_x1(n: int, order: int = 7) -> "GraphSurface":
        p = MultiPoly.x_norm_sq(n).scale(Fraction(1, 2)) + MultiPoly.var(n, 0) ** 3
        return GraphSurface.polynomial(p, order, name="cubic_x1")

    @staticmethod
    def builtin(name: str, n: int, order: int = 7, radius=Fraction(1)):
        table = {
            "flat": lambda: GraphSurface.flat(n, order),
            "sphere": lambda: GraphSurface.sphere(n, radius, order),
            "quartic_x1": lambda: GraphSurface.quartic_x1(n, order),
            "cubic_x1": lambda: GraphSurface.cubic_x1(n, order),
        }
        if name not in table:
            raise ValueError(f"unknown builtin surface {name!r}")
        return table[name]()

    @staticmethod
    def from_json(data: dict, order: int = 7) -> "GraphSurface":
        n = int(data["n"])
        kind = data["kind"]
        if kind == "polynomial":
            poly = poly_from_json(data["poly"], n)
            s = GraphSurface.polynomial(poly, order, name=data.get("name", "poly"))
        elif kind == "sphere":
            s = GraphSurface.sphere(n, Fraction(data.get("radius", "1")), order)
        elif kind == "builtin":
            s = GraphSurface.builtin(data["name"], n, order,
                                     Fraction(data.get("radius", "1")))
        else:
            raise ValueError(f"unknown surface kind {kind!r}")
        if "fd_step" in data:
            s.fd_step = float(data["fd_step"])
        return s

    def to_json(self) -> dict:
        if not self.symbolic:
            raise ValueError("numeric surfaces are not serializable")
        return {
            "n": self.n,
            "kind": "polynomial",
            "poly": poly_to_json(self.f_jet.poly),
            "fd_step": self.fd_step,
            "name": self.name,
        }

    # -- derivative access ----------------------------------------------------

    def _sym(self, key: str):
        if key not in self._cache:
            p = self.f_jet.poly
            if key == "grad":
                self._cache[key] = [BatchPoly(p.diff(i)) for i in range(self.n)]
            elif key == "hess":
                self._cache[key] = [
                    [BatchPoly(p.diff(i).diff(j)) for j in range(self.n)]
                    for i in range(self.n)
                ]
            elif key == "val":
                self._cache[key] = BatchPoly(p)
        return self._cache[key]

    def f_value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if self.symbolic:
            return float(self._sym("val")(x[None, :])[0])
        return float(self.f_num(x))

    def f_grad(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.symbolic:
            g = self._sym("grad")
            return np.array([float(gi(x[None, :])[0]) for gi in g])
        h = self.fd_step * max(1.0, float(np.linalg.norm(x)))
        return numdiff.gradient(self.f_num, x, h)

    def f_hess(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.symbolic:
            hs = self._sym("hess")
            return np.array(
                [[float(hs[i][j](x[None, :])[0]) for j in range(self.n)]
                 for i in range(self.n)]
            )
        scale = max(1.0, float(np.linalg.norm(x)))
        h2 = 0.1 * math.sqrt(self.fd_step) * scale
        return numdiff.hessian(self.f_num, x, h2)

    # Batched variants (used by chart pull-backs and quadrature).

    def f_value_batch(self, pts: np.ndarray) -> np.ndarray:
        if self.symbolic:
            return self._sym("val")(pts)
        return np.array([float(self.f_num(p)) for p in np.atleast_2d(pts)])

    def f_grad_batch(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        if self.symbolic:
            g = self._sym("grad")
            return np.stack([gi(pts) for gi in g], axis=1)
        return np.stack([self.f_grad(p) for p in pts], axis=0)


# -- pointwise geometry -------------------------------------------------------


@dataclass
class PointGeometry:
    g: np.ndarray
    g_inv: np.ndarray
    II: np.ndarray
    H: float
    R_g: float
    rho: float
    eta: float
    w: float  # sqrt(1 + |grad f|^2)


def point_geometry(S: GraphSurface, x) -> PointGeometry:
    """Metric, second fundamental form, curvatures, rho and eta at x."""
    x = np.asarray(x, dtype=float)
    f = S.f_value(x)
    grad = S.f_grad(x)
    hess = S.f_hess(x)
    w2 = 1.0 + float(grad @ grad)
    w = math.sqrt(w2)
    g = np.eye(S.n) + np.outer(grad, grad)
    g_inv = np.eye(S.n) - np.outer(grad, grad) / w2
    II = hess / w
    H = float(np.trace(g_inv @ hess)) / w
    B = g_inv @ II
    II_norm_sq = float(np.trace(B @ B))
    R_g = H * H - II_norm_sq
    rho = float(x @ x) + f * f
    eta = (f - float(x @ grad)) / w
    return PointGeometry(g, g_inv, II, H, R_g, rho, eta, w)


def intrinsic_scalar_curvature(S: GraphSurface, x, h: float = 1e-3) -> float:
    """Scalar curvature of the induced metric from its Christoffel symbols /
    Riemann tensor, by finite differences of the metric field.  Cross-check
    for the Gauss-equation value in PointGeometry."""

    def metric(p):
        grad = S.f_grad(p)
        return np.eye(S.n) + np.outer(grad, grad)

    return numdiff.scalar_curvature_fd(metric, x, h)


# -- the rho / eta identities ---------------------------------------------------


@dataclass
class RhoIdentityResiduals:
    """Residuals of the three position-vector identities on M:
    |grad_g rho|^2 = 4 rho - 4 eta^2,
    Hess_g rho = 2 g + 2 eta II,
    Lap_g rho = 2 n + 2 eta H."""

    grad_sq: float
    hessian: float
    laplacian: float
    exact: bool = False

    def max(self) -> float:
        return max(abs(self.grad_sq), abs(self.hessian), abs(self.laplacian))


def verify_rho_identities(S: GraphSurface, x) -> RhoIdentityResiduals:
    if S.symbolic:
        return _verify_rho_symbolic(S)
    return _verify_rho_numeric(S, x)


def _verify_rho_numeric(S: GraphSurface, x) -> RhoIdentityResiduals:
    x = np.asarray(x, dtype=float)
    geo = point_geometry(S, x)
    f = S.f_value(x)
    grad = S.f_grad(x)
    hess = S.f_hess(x)

    rho_grad = 2.0 * x + 2.0 * f * grad
    rho_hess = 2.0 * np.eye(S.n) + 2.0 * np.outer(grad, grad) + 2.0 * f * hess

    # Christoffel symbols from finite differences of the metric field
    # (independent of the closed-form Gamma used in the symbolic path).
    def metric(p):
        gp = S.f_grad(p)
        return np.eye(S.n) + np.outer(gp, gp)

    h = 1e-3 * max(1.0, float(np.linalg.norm(x)))
    _, dg1, _ = numdiff.metric_derivatives(metric, x, h)
    _, dg2, _ = numdiff.metric_derivatives(metric, x, h / 2.0)
    dg = (4.0 * dg2 - dg1) / 3.0
    gamma = numdiff.christoffel(geo.g, dg)

    cov_hess = rho_hess - np.einsum("cab,c->ab", gamma, rho_grad)
    res1 = float(rho_grad @ geo.g_inv @ rho_grad) - (4.0 * geo.rho - 4.0 * geo.eta**2)
    res2 = float(np.max(np.abs(cov_hess - 2.0 * geo.g - 2.0 * geo.eta * geo.II)))
    res3 = float(np.trace(geo.g_inv @ cov_hess)) - (2.0 * S.n + 2.0 * geo.eta * geo.H)
    return RhoIdentityResiduals(res1, res2, res3, exact=False)


def _verify_rho_symbolic(S: GraphSurface) -> RhoIdentityResiduals:
    """Exact jet computation; residuals are identically zero jets when the
    identities hold to the truncation order.

    Square roots never appear: with w = 1/(1 + |grad f|^2) one has
    eta^2 = (f - x.grad f)^2 w,  eta II_ab = (f - x.grad f) f_ab w, and
    eta H = (f - x.grad f) w tr_g(Hess f), all rational in jets.
    """
    fj = S.f_jet
    n, D = S.n, fj.order
    xs = [Jet.of(MultiPoly.var(n, i), D) for i in range(n)]
    grad = [fj.diff(i).rejet(D) for i in range(n)]
    hess = [[fj.diff(i).diff(j).rejet(D) for j in range(n)] for i in range(n)]
    grad_sq = sum((grad[i] * grad[i] for i in range(n)), Jet.const(n, 0, D))
    w = (Jet.const(n, 1, D) + grad_sq).invert_unit()

    xdotgrad = sum((xs[i] * grad[i] for i in range(n)), Jet.const(n, 0, D))
    u = fj - xdotgrad  # eta * sqrt(1+|grad f|^2)
    rho = Jet.of(MultiPoly.x_norm_sq(n), D) + fj * fj
    rho_grad = [2 * xs[i] + 2 * fj * grad[i] for i in range(n)]

    # g^{-1} v = v - w (grad f . v) grad f  (Sherman-Morrison).
    def ginv_apply(v):
        dot = sum((grad[i] * v[i] for i in range(n)), Jet.const(n, 0, D))
        return [v[i] - w * dot * grad[i] for i in range(n)]

    # f itself is certified to order D, its Hessian only to D - 2; products
    # inherit the weakest certification, so residuals are measured there.
    cert = D - 2

    ginv_rho_grad = ginv_apply(rho_grad)
    lhs1 = sum((rho_grad[i] * ginv_rho_grad[i] for i in range(n)), Jet.const(n, 0, D))
    res1 = lhs1 - (4 * rho - 4 * u * u * w)

    # Gamma^c_ab = (g^{-1} grad f)_c f_ab = w grad_c f_ab, so
    # Hess_ab = rho_ab - w (grad f . grad rho) f_ab.
    graddot = sum((grad[i] * rho_grad[i] for i in range(n)), Jet.const(n, 0, D))

    def mag(j: Jet) -> float:
        p = j.poly.truncate(cert)
        if p.is_zero:
            return 0.0
        return float(max(abs(c) for c in p.terms.values()))

    res2_max = 0.0
    rho_hess_rows = []
    for b in range(n):
        row = []
        for a in range(n):
            rho_ab = (
                Jet.const(n, 2 if a == b else 0, D)
                + 2 * grad[a] * grad[b]
                + 2 * fj * hess[a][b]
            )
            row.append(rho_ab)
            cov = rho_ab - w * graddot * hess[a][b]
            g_ab = Jet.const(n, 1 if a == b else 0, D) + grad[a] * grad[b]
            res2_max = max(res2_max, mag(cov - 2 * g_ab - 2 * u * w * hess[a][b]))
        rho_hess_rows.append(row)

    # Laplacian: tr(g^{-1} Cov) = tr(g^{-1} rho_hess) - w graddot tr(g^{-1} f'').
    tr_hess = Jet.const(n, 0, D)
    for j in range(n):
        tr_hess = tr_hess + ginv_apply([hess[i][j] for i in range(n)])[j]
    tr_rho_hess = Jet.const(n, 0, D)
    for b in range(n):
        tr_rho_hess = tr_rho_hess + ginv_apply(rho_hess_rows[b])[b]
    lap_lhs = tr_rho_hess - w * graddot * tr_hess
    res3 = lap_lhs - (Jet.const(n, 2 * n, D) + 2 * u * w * tr_hess)

    return RhoIdentityResiduals(mag(res1), res2_max, mag(res3), exact=True)


# -- umbilical decomposition ------------------------------------------------------


def umbilical_decompose(S: GraphSurface):
    """Split a symbolic f into (H, {k: A_k}) with f = (H/2n)|x|^2 + sum A_k.

    H is returned as a Fraction when numeric, else as the spatial-constant
    MultiPoly (e.g. the symbolic parameter H).  Raises NotUmbilical when the
    quadratic part is not a multiple of |x|^2.
    """
    if not S.symbolic:
        raise ValueError("umbilical decomposition needs a symbolic surface")
    n = S.n
    parts = S.f_jet.poly.homogeneous_parts()
    quad = parts.get(2, MultiPoly.zero(n))
    if quad.is_zero:
        H = Fraction(0)
    else:
        q = poly_divexact(quad, MultiPoly.x_norm_sq(n))
        if q is None or q.degree() > 0:
            raise NotUmbilical(f"quadratic part {quad!r} is not radial")
        q = q.scale(2 * n)
        H = q.constant_term() if not q.param_names() else q
    higher = {k: p for k, p in parts.items() if k >= 3}
    return H, higher


# -- inverted-cylinder principal curvatures -----------------------------------------


@dataclass
class PlaneCurve:
    """Arc-length plane curve t -> (x, y) with derivatives through order 2."""

    eval2: Callable[[float], Tuple[Tuple[float, float], ...]]
    name: str = ""

    def __call__(self, t: float):
        return self.eval2(t)

    @staticmethod
    def line() -> "PlaneCurve":
        return PlaneCurve(lambda t: ((t, 1.0), (1.0, 0.0), (0.0, 0.0)), "line")

    @staticmethod
    def circle_through_origin(R: float = 1.0) -> "PlaneCurve":
        def ev(t):
            a = t / R
            return (
                (R * math.sin(a), R * (1.0 - math.cos(a))),
                (math.cos(a), math.sin(a)),
                (-math.sin(a) / R, math.cos(a) / R),
            )

        return PlaneCurve(ev, f"circle(R={R})")


@dataclass
class CylinderCurvatures:
    lam: float          # closed form, multiplicity >= n-1
    mu: float           # closed form, the remaining curvature
    eigenvalues: np.ndarray  # numeric spectrum of the shape operator
    sign: int           # global normal sign used to match the spectrum


def cylinder_inversion_curvatures(
    curve: PlaneCurve, t: float, z: np.ndarray, h: float = 1e-5
) -> CylinderCurvatures:
    """Principal curvatures of the inverted cylinder over a plane curve.

    The cylinder (x(t), y(t), z) is inverted through the origin; the result
    has closed-form principal curvatures lam = -2(x y' - x' y) with
    multiplicity >= n-1 and mu = lam - k(t)(x^2 + y^2 + |z|^2), where k is
    the signed curvature with respect to the plane normal (y', -x'), the
    orientation consistent with the lam formula: k = y' x'' - x' y''.
    The numeric spectrum comes from a finite-difference
    shape operator and is matched up to a global orientation sign.
    """
    z = np.asarray(z, dtype=float)
    nm1 = z.size
    n = nm1 + 1

    (x, y), (xp, yp), (xpp, ypp) = curve(t)
    if abs(xp * xp + yp * yp - 1.0) > 1e-8:
        raise ValueError("curve is not parametrized by arc length at t")
    q = x * x + y * y + float(z @ z)
    if q < 1e-12:
        raise ValueError("inversion center lies on the surface")
    lam = -2.0 * (x * yp - xp * y)
    k = yp * xpp - xp * ypp
    mu = lam - k * q

    def F(u):
        (cx, cy), _, _ = curve(u[0])
        amb = np.concatenate([[cx, cy], u[1:]])
        return amb / float(amb @ amb)

    u0 = np.concatenate([[t], z])
    J = np.empty((n + 1, n))
    for i in range(n):
        up = u0.copy()
        um = u0.copy()
        up[i] += h
        um[i] -= h
        J[:, i] = (F(up) - F(um)) / (2.0 * h)
    # unit normal: left-null vector of J
    _, _, vt = np.linalg.svd(J.T, full_matrices=True)
    N = vt[-1]
    F0 = F(u0)
    II = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            upp = u0.copy(); upp[i] += h; upp[j] += h
            upm = u0.copy(); upm[i] += h; upm[j] -= h
            ump = u0.copy(); ump[i] -= h; ump[j] += h
            umm = u0.copy(); umm[i] -= h; umm[j] -= h
            if i == j:
                # upp/umm are offset by 2h here, so the step in the
                # second-difference stencil is 2h.
                sec = (F(upp) - 2.0 * F0 + F(umm)) / (4.0 * h * h)
            else:
                sec = (F(upp) - F(upm) - F(ump) + F(umm)) / (4.0 * h * h)
            II[i, j] = II[j, i] = float(sec @ N)
    I = J.T @ J
    from scipy.linalg import eigh

    eigs = eigh(II, I, eigvals_only=True)
    expect = np.sort(np.concatenate([np.full(n - 1, lam), [mu]]))
    if np.sum(np.abs(np.sort(eigs) - expect)) <= np.sum(np.abs(np.sort(-eigs) - expect)):
        sign = 1
    else:
        sign = -1
        eigs = -eigs
    return CylinderCurvatures(lam, mu, np.sort(eigs), sign)
