"""Graph-surface geometry: metric, curvatures, position-vector identities,
umbilical decomposition, and the inverted-cylinder spectrum."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from umbilic.polyjet import Jet, MultiPoly
from umbilic.surface import (
    GraphSurface,
    NotUmbilical,
    PlaneCurve,
    cylinder_inversion_curvatures,
    intrinsic_scalar_curvature,
    point_geometry,
    umbilical_decompose,
    verify_rho_identities,
)

RNG = np.random.default_rng(20240817)


def random_cubic(n, rng, n_terms=6, with_quadratic=True):
    """A sparse random polynomial with umbilical quadratic part."""
    p = MultiPoly.zero(n)
    if with_quadratic:
        c2 = Fraction(int(rng.integers(-3, 4)), 2)
        p = p + MultiPoly.x_norm_sq(n).scale(c2)
    for _ in range(n_terms):
        e = [0] * n
        for _ in range(3):
            e[rng.integers(0, n)] += 1
        c = Fraction(int(rng.integers(-4, 5)), int(rng.integers(1, 5)))
        p = p + MultiPoly(n, {(tuple(e), ()): Fraction(1)}).scale(c)
    return p


# -- point geometry against hand values -------------------------------------------


def test_flat_geometry_trivial():
    S = GraphSurface.flat(3)
    geo = point_geometry(S, [0.1, -0.2, 0.3])
    assert np.allclose(geo.g, np.eye(3))
    assert geo.H == 0.0
    assert geo.R_g == 0.0
    assert geo.eta == 0.0
    assert math.isclose(geo.rho, 0.01 + 0.04 + 0.09)


def test_sphere_mean_curvature_sign_convention():
    # The unit sphere tangent to the plane at 0, graphed from below, has
    # H = +n/R = n everywhere with the inner normal.
    n = 3
    S = GraphSurface.sphere(n, Fraction(1), order=11)
    for x in ([0.0, 0.0, 0.0], [0.1, 0.05, -0.08], [0.15, -0.05, 0.05]):
        geo = point_geometry(S, x)
        assert geo.H == pytest.approx(float(n), abs=1e-7)
        # umbilical: II = (H/n) g
        assert np.max(np.abs(geo.II - geo.H / n * geo.g)) < 1e-7
        # scalar curvature of the unit n-sphere is n(n-1)
        assert geo.R_g == pytest.approx(n * (n - 1), abs=1e-6)


def test_sphere_numeric_matches_symbolic():
    n = 4
    Ssym = GraphSurface.sphere(n, Fraction(2), order=9)
    Snum = GraphSurface.sphere_numeric(n, 2.0)
    x = np.array([0.11, -0.07, 0.05, 0.02])
    a = point_geometry(Ssym, x)
    b = point_geometry(Snum, x)
    assert np.max(np.abs(a.g - b.g)) < 1e-9
    assert abs(a.H - b.H) < 1e-5
    assert abs(a.eta - b.eta) < 1e-9


def test_graph_metric_hand_value():
    # f = x1^2: at x = (a, 0, ...) grad = (2a, 0), g = diag(1+4a^2, 1),
    # W = sqrt(1+4a^2), II = diag(2, 0)/W, H = 2/W^3.
    n = 2
    S = GraphSurface.polynomial(MultiPoly.var(n, 0) ** 2, order=5)
    a = 0.3
    geo = point_geometry(S, [a, 0.0])
    W = math.sqrt(1 + 4 * a * a)
    assert np.allclose(geo.g, np.diag([1 + 4 * a * a, 1.0]))
    assert geo.II[0, 0] == pytest.approx(2.0 / W, abs=1e-12)
    assert geo.H == pytest.approx(2.0 / W**3, abs=1e-12)
    # eta = (f - x.grad f)/W = (a^2 - 2a^2)/W
    assert geo.eta == pytest.approx(-a * a / W, abs=1e-12)


def test_gauss_equation_against_fd_curvature():
    # R_g from the Gauss equation must match the intrinsic scalar curvature
    # computed from finite differences of the induced metric alone.
    n = 3
    p = random_cubic(n, np.random.default_rng(7))
    S = GraphSurface.polynomial(p, order=7)
    for x in ([0.05, 0.1, -0.05], [0.12, -0.04, 0.08]):
        geo = point_geometry(S, x)
        R_fd = intrinsic_scalar_curvature(S, x, h=1e-3)
        assert R_fd == pytest.approx(geo.R_g, abs=2e-5, rel=2e-5)


# -- rho / eta identities ----------------------------------------------------------


@pytest.mark.parametrize("n", [2, 3, 4])
def test_rho_identities_symbolic_exact(n):
    rng = np.random.default_rng(100 + n)
    p = random_cubic(n, rng)
    S = GraphSurface.polynomial(p, order=7)
    res = verify_rho_identities(S, None)
    assert res.exact
    assert res.max() == 0.0


def test_rho_identities_symbolic_sphere():
    S = GraphSurface.sphere(3, Fraction(3, 2), order=8)
    res = verify_rho_identities(S, None)
    assert res.exact
    assert res.max() == 0.0


@pytest.mark.parametrize("n", [2, 3])
def test_rho_identities_numeric(n):
    rng = np.random.default_rng(200 + n)
    p = random_cubic(n, rng)
    # The exact polynomial, but exposed to the surface as a black-box evaluator.
    S = GraphSurface(n, f_num=lambda x: float(p.evaluate(list(x))))
    x = 0.1 * rng.standard_normal(n)
    res = verify_rho_identities(S, x)
    assert not res.exact
    assert res.max() < 1e-6


def test_rho_identities_numeric_sphere():
    S = GraphSurface.sphere_numeric(3, 2.0)
    res = verify_rho_identities(S, np.array([0.2, -0.1, 0.15]))
    assert res.max() < 1e-6


@settings(max_examples=10, deadline=None)
@given(st.integers(2, 4), st.integers(0, 10_000))
def test_rho_identities_symbolic_random(n, seed):
    p = random_cubic(n, np.random.default_rng(seed), n_terms=4)
    S = GraphSurface.polynomial(p, order=6)
    assert verify_rho_identities(S, None).max() == 0.0


# -- umbilical decomposition -------------------------------------------------------


def test_umbilical_decompose_basic():
    n = 3
    H = Fraction(5, 2)
    A3 = MultiPoly.var(n, 0) ** 3
    A4 = MultiPoly.var(n, 1) ** 4
    f = MultiPoly.x_norm_sq(n).scale(H / (2 * n)) + A3 + A4
    S = GraphSurface.polynomial(f, order=6)
    h, parts = umbilical_decompose(S)
    assert h == H
    assert parts[3] == A3
    assert parts[4] == A4
    assert set(parts) == {3, 4}


def test_umbilical_decompose_symbolic_H():
    n = 4
    Hp = MultiPoly.param(n, "H")
    f = MultiPoly.x_norm_sq(n) * Hp.scale(Fraction(1, 2 * n))
    S = GraphSurface.polynomial(f, order=6)
    h, parts = umbilical_decompose(S)
    assert h == Hp
    assert parts == {}


def test_umbilical_decompose_rejects_anisotropic():
    n = 3
    f = MultiPoly.var(n, 0) ** 2  # x1^2 is not a multiple of |x|^2
    S = GraphSurface.polynomial(f, order=6)
    with pytest.raises(NotUmbilical):
        umbilical_decompose(S)


def test_umbilical_decompose_sphere():
    # Sphere of radius R: H = n/R, A_3 = 0, A_4 = |x|^4/(8 R^3).
    n = 3
    R = Fraction(2)
    S = GraphSurface.sphere(n, R, order=7)
    h, parts = umbilical_decompose(S)
    assert h == Fraction(n) / R
    assert 3 not in parts
    assert parts[4] == (MultiPoly.x_norm_sq(n) ** 2).scale(Fraction(1, 8) / R**3)


# -- inverted cylinder ------------------------------------------------------------


def test_inverted_cylinder_line():
    # Cylinder over the line y = 1: the inversion is a sphere through 0 of
    # radius 1/2, totally umbilical with both curvatures 2.
    for nm1 in (2, 3):
        z = 0.2 * np.arange(1, nm1 + 1)
        out = cylinder_inversion_curvatures(PlaneCurve.line(), 0.3, z)
        assert out.lam == pytest.approx(2.0)
        assert out.mu == pytest.approx(2.0)
        assert np.max(np.abs(out.eigenvalues - 2.0)) < 1e-5


def test_inverted_cylinder_circle():
    # Cylinder over a circle through the origin: lam has multiplicity n-1
    # and the remaining curvature is mu = lam - k q, matched numerically.
    curve = PlaneCurve.circle_through_origin(1.5)
    z = np.array([0.25, -0.1])
    t = 0.7
    out = cylinder_inversion_curvatures(curve, t, z)
    expect = np.sort(np.r_[np.full(2, out.lam), out.mu])
    assert np.max(np.abs(out.eigenvalues - expect)) < 2e-4


def test_inverted_cylinder_rejects_origin():
    with pytest.raises(ValueError):
        cylinder_inversion_curvatures(
            PlaneCurve.circle_through_origin(1.0), 0.0, np.zeros(2)
        )


def test_plane_curve_arclength_guard():
    bad = PlaneCurve(lambda t: ((2 * t, 1.0), (2.0, 0.0), (0.0, 0.0)), "fast-line")
    with pytest.raises(ValueError):
        cylinder_inversion_curvatures(bad, 0.1, np.array([0.3]))


# -- serialization ------------------------------------------------------------


def test_surface_json_roundtrip():
    n = 3
    p = MultiPoly.x_norm_sq(n).scale(Fraction(1, 2)) + MultiPoly.var(n, 0) ** 3
    S = GraphSurface.polynomial(p, order=7, name="demo")
    data = S.to_json()
    S2 = GraphSurface.from_json(data)
    assert S2.f_jet.poly == S.f_jet.poly
    assert S2.n == n


def test_surface_builtins():
    for name in ("flat", "sphere", "quartic_x1", "cubic_x1"):
        S = GraphSurface.builtin(name, 3)
        assert S.symbolic
        h, _ = umbilical_decompose(S)
        if name in ("flat", "cubic_x1"):
            pass
        elif name == "sphere":
            assert h == 3
        elif name == "quartic_x1":
            assert h == 3  # quadratic part |x|^2/2 means H = n


def test_batch_matches_pointwise():
    S = GraphSurface.quartic_x1(3)
    pts = RNG.uniform(-0.3, 0.3, size=(8, 3))
    vals = S.f_value_batch(pts)
    grads = S.f_grad_batch(pts)
    for i, p in enumerate(pts):
        assert vals[i] == pytest.approx(S.f_value(p), abs=1e-14)
        assert np.max(np.abs(grads[i] - S.f_grad(p))) < 1e-14
