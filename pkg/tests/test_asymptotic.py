"""Inversion charts, rescaled-metric components, the exact descending
series at infinity, and the numeric decay-order estimator."""

import math
from fractions import Fraction
from itertools import combinations_with_replacement

import numpy as np
import pytest

from umbilic import asymptotic as asym
from umbilic.numdiff import power_law_fit
from umbilic.polyjet import Jet, MultiPoly, SphericalSeries
from umbilic.surface import GraphSurface


def generic_homogeneous(n: int, deg: int, prefix: str) -> MultiPoly:
    """Fully generic homogeneous polynomial with one parameter per monomial."""
    out = MultiPoly.zero(n)
    for combo in combinations_with_replacement(range(n), deg):
        name = prefix + "_" + "".join(str(i) for i in combo)
        mono = MultiPoly.param(n, name)
        for i in combo:
            mono = mono * MultiPoly.var(n, i)
        out = out + mono
    return out


def pure_quadratic_jet(n: int):
    """f = (H/2n)|x|^2 with symbolic H."""
    H = MultiPoly.param(n, "H")
    return Jet.of(MultiPoly.x_norm_sq(n) * H.scale(Fraction(1, 2 * n)), 7), H


# -- chart maps -----------------------------------------------------------------


def test_chart_roundtrip_inverted():
    rng = np.random.default_rng(0)
    ch = asym.Chart.inverted(4)
    pts = rng.standard_normal((1000, 4)) * 10.0 + 20.0
    back = ch.from_x_batch(ch.to_x_batch(pts))
    assert np.max(np.abs(back - pts) / np.abs(pts)) < 1e-12
    xs = rng.standard_normal((1000, 4)) * 0.01
    fwd = ch.to_x_batch(ch.from_x_batch(xs))
    assert np.max(np.abs(fwd - xs) / np.abs(xs)) < 1e-12


def test_chart_roundtrip_corrected():
    rng = np.random.default_rng(1)
    ch = asym.Chart.corrected(4, 4.0)
    pts = rng.standard_normal((1000, 4)) * 10.0 + 20.0
    back = ch.from_x_batch(ch.to_x_batch(pts))
    assert np.max(np.abs(back - pts) / np.abs(pts)) < 1e-12


def test_corrected_radial_identity():
    # t^2 = r^2 - c implies t dt = r dr along radial rays.
    ch = asym.Chart.corrected(5, 5.0)

    def t_of_r(r):
        return math.sqrt(r * r - ch.c)

    for r in (1.0, 3.0, 10.0, 100.0):
        h = 1e-5 * r
        d1 = (t_of_r(r + h) - t_of_r(r - h)) / (2.0 * h)
        d2 = (t_of_r(r + h / 2) - t_of_r(r - h / 2)) / h
        dtdr = (4.0 * d2 - d1) / 3.0
        assert abs(t_of_r(r) * dtdr - r) / r < 1e-10


def test_corrected_chart_domain():
    ch = asym.Chart.corrected(3, 3.0)
    assert ch.singular_radius == pytest.approx(3.0 / (3.0 * math.sqrt(2.0)))
    # x too large -> |y| below the singular radius
    with pytest.raises(asym.ChartDomainError):
        ch.from_x(np.array([2.0, 0.0, 0.0]))
    with pytest.raises(asym.ChartDomainError):
        ch.to_x(np.zeros(3))
    # y_radius follows r^2 = t^2 + c
    assert ch.y_radius(10.0) == pytest.approx(math.sqrt(100.0 + ch.c))


def test_chart_for_flags():
    S = GraphSurface.sphere(3, Fraction(1), order=7)
    assert asym.chart_for(S, "y").kind == asym.INVERTED_Y
    chz = asym.chart_for(S, "z")
    assert chz.kind == asym.CORRECTED_Z
    assert chz.H == pytest.approx(3.0)
    cubic = GraphSurface.cubic_x1(5)
    with pytest.raises(asym.ChartRequirementError):
        asym.chart_for(cubic, "z")
    with pytest.raises(ValueError):
        asym.chart_for(S, "w")


# -- numeric metric components ---------------------------------------------------


def test_flat_deviation_zero():
    S = GraphSurface.flat(3)
    ch = asym.Chart.inverted(3)
    pts = np.array([[10.0, 2.0, -1.0], [100.0, 0.0, 0.0]])
    dev = asym.ghat_deviation_batch(S, ch, pts)
    assert np.max(np.abs(dev)) == 0.0


def test_sphere_inverted_order_two():
    # deviation ~ (H^2/2n^2-ish constants) r^{-2} in the inverted chart
    n = 3
    S = GraphSurface.sphere(n, Fraction(1), order=9)
    ch = asym.Chart.inverted(n)
    d = np.array([0.6, -0.5, 0.4])
    d /= np.linalg.norm(d)
    mags = []
    for r in (100.0, 1000.0):
        dev = asym.ghat_deviation_batch(S, ch, (r * d)[None, :])[0]
        mags.append(np.max(np.abs(dev)))
    assert mags[0] / mags[1] == pytest.approx(100.0, rel=0.05)
    c = ch.H * 0.0 + S.n * S.n / (2.0 * n * n)  # H = n, so H^2/2n^2 = 1/2
    assert mags[0] * 100.0**2 == pytest.approx(c, rel=0.3)


def test_components_match_direct_pullback():
    # cross-check the cancellation-free path against the naive J^T G J
    # evaluation in float arithmetic at moderate radius.
    S = GraphSurface.quartic_x1(6)
    ch = asym.chart_for(S, "z")
    rng = np.random.default_rng(7)
    for _ in range(4):
        z = rng.standard_normal(6)
        z *= 5.0 / np.linalg.norm(z)
        G = asym.ghat_components(S, ch, z)

        def x_of(p):
            return ch.to_x(p)

        h = 1e-6
        J = np.empty((6, 6))
        for k in range(6):
            e = np.zeros(6)
            e[k] = h
            J[:, k] = (x_of(z + e) - x_of(z - e)) / (2.0 * h)
        x = x_of(z)
        gr = S.f_grad(x)
        rho = float(x @ x) + S.f_value(x) ** 2
        amb = (np.eye(6) + np.outer(gr, gr)) / rho**2
        assert np.allclose(G, J.T @ amb @ J, rtol=1e-6, atol=1e-9)


# -- symbolic series -------------------------------------------------------------


def test_series_rejects_cubic():
    n = 4
    p = MultiPoly.x_norm_sq(n).scale(Fraction(1, 2)) + MultiPoly.var(n, 0) ** 3
    with pytest.raises(asym.ChartRequirementError):
        asym.ghat_asymptotic_series(Jet.of(p, 7))


def test_inverse_conformal_profile_quadratic():
    # (1 + |y|^2 f^2)^{-2} = 1 - c t^{-2} + (7H^4/16n^4) t^{-4} + O(t^{-6})
    # in the corrected chart when only the quadratic term is present.
    n = 3
    f, H = pure_quadratic_jet(n)
    prof = asym.inverse_conformal_profile(f, asym.CORRECTED_Z, -5)
    expected = SphericalSeries.canonicalize(
        n,
        [
            (0, MultiPoly.const(n, 1)),
            (-2, (H * H).scale(Fraction(-1, 2 * n * n))),
            (-4, (H**4).scale(Fraction(7, 16 * n**4))),
        ],
        -5,
        0,
    )
    assert prof == expected


def test_inverse_conformal_profile_generic():
    # with quartic and quintic coefficients the t^{-4} and t^{-5} terms
    # pick up -2H/n times the restricted coefficient functions.
    n = 3
    H = MultiPoly.param(n, "H")
    A4 = generic_homogeneous(n, 4, "a")
    A5 = generic_homogeneous(n, 5, "b")
    poly = MultiPoly.x_norm_sq(n) * H.scale(Fraction(1, 2 * n)) + A4 + A5
    prof = asym.inverse_conformal_profile(Jet.of(poly, 7), asym.CORRECTED_Z, -5)
    expected = SphericalSeries.canonicalize(
        n,
        [
            (0, MultiPoly.const(n, 1)),
            (-2, (H * H).scale(Fraction(-1, 2 * n * n))),
            (-4, (H**4).scale(Fraction(7, 16 * n**4))),
            (-8, (H * A4).scale(Fraction(-2, n))),
            (-10, (H * A5).scale(Fraction(-2, n))),
        ],
        -5,
        0,
    )
    assert prof == expected


def test_series_leading_order_four():
    # every component of the corrected-chart deviation is O(t^{-4})
    for n in (3, 5):
        f, H = pure_quadratic_jet(n)
        hz = asym.ghat_asymptotic_series(f, asym.CORRECTED_Z, -5)
        for i in range(n):
            for j in range(n):
                for w in (-1, -2, -3):
                    assert hz[i][j].coefficient(w).is_zero


def test_series_order_four_coefficient():
    # h_ij = (3H^4/16n^4) t^{-4} delta_ij - (3H^4/4n^4) t^{-6} z_i z_j + ...
    n = 3
    f, H = pure_quadratic_jet(n)
    hz = asym.ghat_asymptotic_series(f, asym.CORRECTED_Z, -5)
    c4 = (H**4).scale(Fraction(3, 16 * n**4))
    c6 = (H**4).scale(Fraction(-3, 4 * n**4))
    for i in range(n):
        for j in range(n):
            terms = [(-2, c6 * MultiPoly.var(n, i) * MultiPoly.var(n, j))]
            if i == j:
                terms.append((0, c4))
            expected = SphericalSeries.canonicalize(n, terms, 0, 0)
            assert hz[i][j].coefficient(-4) == expected
            assert hz[i][j].coefficient(-5).is_zero


def test_trace_series_matches_full_matrix():
    n = 4
    H = MultiPoly.param(n, "H")
    A4 = MultiPoly.var(n, 0) ** 4
    poly = MultiPoly.x_norm_sq(n) * H.scale(Fraction(1, 2 * n)) + A4
    f = Jet.of(poly, 7)
    for kind in (asym.INVERTED_Y, asym.CORRECTED_Z):
        hz = asym.ghat_asymptotic_series(f, kind, -5)
        gtt, tr = asym.ghat_radial_trace_series(f, kind, -5)
        one = SphericalSeries.one(n, -5, 0)
        rad = [
            SphericalSeries.from_term(-1, MultiPoly.var(n, i), -5, 0)
            for i in range(n)
        ]
        gtt2 = SphericalSeries.zero(n, -5, 0)
        tr2 = SphericalSeries.zero(n, -5, 0)
        for i in range(n):
            tr2 = tr2 + hz[i][i] + one
            for j in range(n):
                gtt2 = gtt2 + rad[i] * rad[j] * hz[i][j]
        gtt2 = gtt2 + one
        assert gtt == gtt2
        assert tr == tr2


def test_radial_minus_trace_expansion_generic():
    # g_tt - sum_a g_aa = -(n-1)[1 + (3H^4/16n^4 - 2H/n A4) t^{-4}
    #                              - (2H/n) A5 t^{-5}] + O(t^{-6})
    n = 3
    H = MultiPoly.param(n, "H")
    A4 = generic_homogeneous(n, 4, "a")
    A5 = generic_homogeneous(n, 5, "b")
    poly = MultiPoly.x_norm_sq(n) * H.scale(Fraction(1, 2 * n)) + A4 + A5
    gtt, tr = asym.ghat_radial_trace_series(Jet.of(poly, 7), asym.CORRECTED_Z, -5)
    diff = gtt - tr
    assert diff.coefficient(0) == SphericalSeries.canonicalize(
        n, [(0, MultiPoly.const(n, 1 - n))], 0, 0
    )
    for w in (-1, -2, -3):
        assert diff.coefficient(w).is_zero
    c4 = SphericalSeries.canonicalize(
        n,
        [
            (0, (H**4).scale(Fraction(-3 * (n - 1), 16 * n**4))),
            (-4, (H * A4).scale(Fraction(2 * (n - 1), n))),
        ],
        0,
        0,
    )
    c5 = SphericalSeries.canonicalize(
        n, [(-5, (H * A5).scale(Fraction(2 * (n - 1), n)))], 0, 0
    )
    assert diff.coefficient(-4) == c4
    assert diff.coefficient(-5) == c5


def test_series_matches_numeric_sphere():
    # the exact series evaluated at concrete points vs the closed-form
    # numeric components, sphere of radius 1 (H = n, quartic tail).
    n = 3
    S = GraphSurface.sphere(n, Fraction(1), order=11)
    hz = asym.ghat_asymptotic_series(S.f_jet, asym.CORRECTED_Z, -5)
    ch = asym.chart_for(S, "z")
    rng = np.random.default_rng(3)
    for t, tol in ((10.0, 1e-3), (100.0, 1e-5)):
        for _ in range(3):
            d = rng.standard_normal(n)
            d /= np.linalg.norm(d)
            z = t * d
            num = asym.ghat_deviation_batch(S, ch, z[None, :])[0]
            ser = np.array(
                [[hz[i][j].evaluate(list(z)) for j in range(n)] for i in range(n)]
            )
            scale = np.max(np.abs(num))
            assert np.max(np.abs(num - ser)) < tol * scale


def test_series_residual_slope():
    # the numeric-minus-series residual must decay at least like t^{-6}
    n = 3
    S = GraphSurface.sphere(n, Fraction(1), order=11)
    hz = asym.ghat_asymptotic_series(S.f_jet, asym.CORRECTED_Z, -5)
    ch = asym.chart_for(S, "z")
    d = np.array([0.5, -0.7, 0.4])
    d /= np.linalg.norm(d)
    ts = [10.0, 30.0, 100.0, 300.0]
    res = []
    for t in ts:
        z = t * d
        num = asym.ghat_deviation_batch(S, ch, z[None, :])[0]
        ser = np.array(
            [[hz[i][j].evaluate(list(z)) for j in range(n)] for i in range(n)]
        )
        res.append(float(np.max(np.abs(num - ser))))
    slope, _, _ = power_law_fit(ts, res)
    assert slope <= -5.8


# -- decay-order estimation -------------------------------------------------------


RADII = [10.0, 10**1.5, 100.0, 10**2.5, 1000.0]


def test_decay_flat_infinite():
    S = GraphSurface.flat(3)
    fit = asym.decay_order_estimate(S, asym.Chart.inverted(3), [10.0, 100.0, 1000.0])
    assert fit.tau_hat == math.inf


def test_decay_sphere_inverted():
    S = GraphSurface.sphere(3, Fraction(1), order=9)
    fit = asym.decay_order_estimate(S, asym.chart_for(S, "y"), RADII)
    assert 1.9 <= fit.tau_hat <= 2.1
    assert fit.r_squared >= 0.99
    # derivative decay one and two orders faster (tolerance 0.2)
    assert fit.slope_dh <= -(fit.tau_hat + 1.0) + 0.2
    assert fit.slope_ddh <= -(fit.tau_hat + 2.0) + 0.2


def test_decay_quartic_corrected():
    S = GraphSurface.quartic_x1(6)
    fit = asym.decay_order_estimate(S, asym.chart_for(S, "z"), RADII)
    assert fit.tau_hat >= 3.8
    assert fit.r_squared >= 0.99


def test_decay_cubic_inverted_still_order_two():
    # umbilicity alone gives order 2 in the inverted chart, cubic or not
    S = GraphSurface.cubic_x1(5)
    fit = asym.decay_order_estimate(S, asym.chart_for(S, "y"), RADII)
    assert 1.8 <= fit.tau_hat <= 2.25
    assert fit.r_squared >= 0.99


def test_decay_fit_serialization():
    S = GraphSurface.sphere(3, Fraction(1), order=7)
    fit = asym.decay_order_estimate(S, asym.chart_for(S, "y"), [10.0, 100.0, 1000.0])
    blob = fit.to_json()
    assert blob["chart"] == asym.INVERTED_Y
    assert len(blob["radii"]) == 3
    rows = fit.csv_rows()
    assert rows[0] == ["radius", "max_h", "max_dh", "max_ddh"]
    assert len(rows) == 4
