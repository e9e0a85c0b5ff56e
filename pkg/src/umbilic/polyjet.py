"""Exact multivariate polynomial, truncated-jet, and radial-series algebra.

Everything here is exact rational arithmetic (``fractions.Fraction``).  A
monomial carries two parts: spatial exponents in the coordinates x_1..x_n,
and powers of named scalar parameters (the mean curvature ``H``, generic
coefficient symbols, ...).  Parameters never count toward the spatial degree
used for truncation and homogeneity, so identities proved by these classes
hold as polynomial identities in the parameters.

Three layers:

  MultiPoly        sparse exact polynomial, the coefficient workhorse
  Jet              a MultiPoly truncated at total spatial degree D
  SphericalSeries  canonical sums of r^m * P(x) with P homogeneous and
                   |x|^2-free, graded by total order m + deg P; this is the
                   ring where divisions by |x|^2-like quantities live, both
                   for expansions near a point (orders bounded above) and
                   near infinity (orders bounded below)
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

# A parameter monomial: sorted tuple of (name, power), power >= 1.
Params = Tuple[Tuple[str, int], ...]
# Full monomial key: (spatial exponent tuple of length n, parameter monomial).
Exponent = Tuple[int, ...]
Key = Tuple[Exponent, Params]

_NO_PARAMS: Params = ()

_int_add = int.__add__


def _merge_params(a: Params, b: Params) -> Params:
    if not a:
        return b
    if not b:
        return a
    out: Dict[str, int] = dict(a)
    for name, k in b:
        out[name] = out.get(name, 0) + k
    return tuple(sorted(out.items()))


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    raise TypeError(f"exact coefficient required, got {type(c).__name__}")


@dataclass(frozen=True)
class MultiPoly:
    """Sparse exact polynomial in n spatial variables plus named parameters.

    ``terms`` maps monomial keys to nonzero Fraction coefficients.  Instances
    are immutable; all operations return new polynomials in canonical form
    (no zero coefficients stored).
    """

    n: int
    terms: Mapping[Key, Fraction] = field(default_factory=dict)

    # -- constructors -------------------------------------------------------

    @staticmethod
    def make(n: int, terms: Mapping[Key, Fraction]) -> "MultiPoly":
        clean = {k: c for k, c in terms.items() if c != 0}
        return MultiPoly(n, clean)

    @staticmethod
    def zero(n: int) -> "MultiPoly":
        return MultiPoly(n, {})

    @staticmethod
    def const(n: int, c) -> "MultiPoly":
        c = _as_fraction(c)
        if c == 0:
            return MultiPoly.zero(n)
        return MultiPoly(n, {((0,) * n, _NO_PARAMS): c})

    @staticmethod
    def var(n: int, i: int) -> "MultiPoly":
        if not 0 <= i < n:
            raise ValueError(f"variable index {i} out of range for n={n}")
        e = [0] * n
        e[i] = 1
        return MultiPoly(n, {(tuple(e), _NO_PARAMS): Fraction(1)})

    @staticmethod
    def param(n: int, name: str, power: int = 1) -> "MultiPoly":
        return MultiPoly(n, {((0,) * n, ((name, power),)): Fraction(1)})

    @staticmethod
    def x_norm_sq(n: int) -> "MultiPoly":
        """The radial polynomial |x|^2 = x_1^2 + ... + x_n^2."""
        terms = {}
        for i in range(n):
            e = [0] * n
            e[i] = 2
            terms[(tuple(e), _NO_PARAMS)] = Fraction(1)
        return MultiPoly(n, terms)

    # -- ring structure ------------------------------------------------------

    def _check(self, other: "MultiPoly") -> None:
        if self.n != other.n:
            raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        self._check(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            s = out.get(k, Fraction(0)) + c
            if s == 0:
                out.pop(k, None)
            else:
                out[k] = s
        return MultiPoly(self.n, out)

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(self.n, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, MultiPoly):
            self._check(other)
            out: Dict[Key, Fraction] = {}
            get = out.get
            b_items = list(other.terms.items())
            for (ea, pa), ca in self.terms.items():
                for (eb, pb), cb in b_items:
                    k = (tuple(map(_int_add, ea, eb)), _merge_params(pa, pb))
                    v = get(k)
                    if v is None:
                        out[k] = ca * cb
                    else:
                        s = v + ca * cb
                        if s:
                            out[k] = s
                        else:
                            del out[k]
            return MultiPoly(self.n, out)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def mul_truncated(self, other: "MultiPoly", max_degree: int) -> "MultiPoly":
        """Product truncated at total spatial degree max_degree, skipping
        the discarded term pairs instead of computing and dropping them."""
        self._check(other)
        b_items = sorted(
            ((sum(e), (e, p), c) for (e, p), c in other.terms.items()),
            key=lambda t: t[0],
        )
        out: Dict[Key, Fraction] = {}
        get = out.get
        for (ea, pa), ca in self.terms.items():
            da = sum(ea)
            for db, (eb, pb), cb in b_items:
                if da + db > max_degree:
                    break
                k = (tuple(map(_int_add, ea, eb)), _merge_params(pa, pb))
                v = get(k)
                if v is None:
                    out[k] = ca * cb
                else:
                    s = v + ca * cb
                    if s:
                        out[k] = s
                    else:
                        del out[k]
        return MultiPoly(self.n, out)

    def scale(self, c) -> "MultiPoly":
        c = _as_fraction(c)
        if c == 0:
            return MultiPoly.zero(self.n)
        return MultiPoly(self.n, {k: c * v for k, v in self.terms.items()})

    def __pow__(self, k: int) -> "MultiPoly":
        if k < 0:
            raise ValueError("negative polynomial power")
        out = MultiPoly.const(self.n, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MultiPoly)
            and self.n == other.n
            and dict(self.terms) == dict(other.terms)
        )

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    # -- structure queries ---------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Maximal total spatial degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(e) for e, _ in self.terms)

    def min_degree(self) -> int:
        if not self.terms:
            return -1
        return min(sum(e) for e, _ in self.terms)

    def is_homogeneous(self) -> bool:
        degs = {sum(e) for e, _ in self.terms}
        return len(degs) <= 1

    def homogeneous_part(self, d: int) -> "MultiPoly":
        return MultiPoly(
            self.n, {k: c for k, c in self.terms.items() if sum(k[0]) == d}
        )

    def homogeneous_parts(self) -> Dict[int, "MultiPoly"]:
        out: Dict[int, Dict[Key, Fraction]] = {}
        for k, c in self.terms.items():
            out.setdefault(sum(k[0]), {})[k] = c
        return {d: MultiPoly(self.n, t) for d, t in sorted(out.items())}

    def truncate(self, max_degree: int) -> "MultiPoly":
        return MultiPoly(
            self.n, {k: c for k, c in self.terms.items() if sum(k[0]) <= max_degree}
        )

    def constant_term(self) -> Fraction:
        """Coefficient of the parameter-free constant monomial."""
        return self.terms.get(((0,) * self.n, _NO_PARAMS), Fraction(0))

    def spatial_constant_part(self) -> "MultiPoly":
        """All terms of spatial degree zero (may still carry parameters)."""
        return self.homogeneous_part(0)

    def param_names(self) -> set:
        names = set()
        for (_, p) in self.terms:
            names.update(name for name, _ in p)
        return names

    # -- calculus ------------------------------------------------------------

    def diff(self, i: int) -> "MultiPoly":
        out: Dict[Key, Fraction] = {}
        for (e, p), c in self.terms.items():
            if e[i] == 0:
                continue
            e2 = list(e)
            e2[i] -= 1
            out[(tuple(e2), p)] = c * e[i]
        return MultiPoly(self.n, out)

    def grad(self) -> List["MultiPoly"]:
        return [self.diff(i) for i in range(self.n)]

    def laplacian(self) -> "MultiPoly":
        out = MultiPoly.zero(self.n)
        for i in range(self.n):
            out = out + self.diff(i).diff(i)
        return out

    # -- evaluation ----------------------------------------------------------

    def evaluate(self, point: Sequence, params: Optional[Mapping[str, object]] = None):
        """Evaluate at a point; exact if coordinates/params are Fractions."""
        params = params or {}
        total = None
        for (e, p), c in self.terms.items():
            v = c
            for xi, ei in zip(point, e):
                if ei:
                    v = v * xi**ei
            for name, k in p:
                if name not in params:
                    raise KeyError(f"value for parameter {name!r} required")
                v = v * params[name] ** k
            total = v if total is None else total + v
        if total is None:
            x0 = point[0] if len(point) else 0
            return 0 * x0 if not isinstance(x0, (int, Fraction)) else Fraction(0)
        return total

    def subs_params(self, values: Mapping[str, Fraction]) -> "MultiPoly":
        """Substitute exact values for (some) parameters."""
        out: Dict[Key, Fraction] = {}
        for (e, p), c in self.terms.items():
            rest = []
            for name, k in p:
                if name in values:
                    c = c * _as_fraction(values[name]) ** k
                else:
                    rest.append((name, k))
            if c == 0:
                continue
            key = (e, tuple(rest))
            s = out.get(key, Fraction(0)) + c
            if s == 0:
                out.pop(key, None)
            else:
                out[key] = s
        return MultiPoly(self.n, out)

    # -- display -------------------------------------------------------------

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        bits = []
        for (e, p), c in sorted(self.terms.items(), key=lambda kv: (sum(kv[0][0]), kv[0])):
            mono = [f"x{i+1}^{k}" if k > 1 else f"x{i+1}" for i, k in enumerate(e) if k]
            mono += [f"{nm}^{k}" if k > 1 else nm for nm, k in p]
            body = "*".join(mono) if mono else "1"
            bits.append(f"({c})*{body}")
        return " + ".join(bits)


# -- exact division ----------------------------------------------------------


def _grlex_key(key: Key):
    e, p = key
    return (sum(e), e, p)


def poly_divexact(P: MultiPoly, Q: MultiPoly) -> Optional[MultiPoly]:
    """Exact quotient P / Q, or None when Q does not divide P.

    Q must be parameter-free; P may carry parameters, in which case each
    parameter-monomial slice of P is divided separately.  Long division uses
    the graded lexicographic order on spatial exponents: whenever P is a true
    multiple of Q, the leading term of every intermediate remainder is
    divisible by the leading term of Q, so a single failed leading-term step
    certifies non-divisibility.
    """
    if Q.is_zero:
        raise ZeroDivisionError("division by the zero polynomial")
    if Q.param_names():
        raise ValueError("divisor with parameters is not supported")
    if P.is_zero:
        return MultiPoly.zero(P.n)
    P._check(Q)

    # Split P by parameter monomial; divide each purely spatial slice.
    slices: Dict[Params, Dict[Exponent, Fraction]] = {}
    for (e, p), c in P.terms.items():
        slices.setdefault(p, {})[e] = c

    q_lead = max(Q.terms, key=_grlex_key)
    q_lead_e = q_lead[0]
    q_lead_c = Q.terms[q_lead]
    q_rest = [(qe, qc) for (qe, _), qc in Q.terms.items() if qe != q_lead_e]

    def heap_key(e: Exponent):
        # negated graded lexicographic order for the min-heap
        return (-sum(e), tuple(-x for x in e), e)

    result: Dict[Key, Fraction] = {}
    for pmono, rem in slices.items():
        heap = [heap_key(e) for e in rem]
        heapq.heapify(heap)
        while heap:
            lead_e = heapq.heappop(heap)[2]
            c = rem.pop(lead_e, None)
            if c is None:
                continue  # cancelled by an earlier reduction step
            diff = tuple(a - b for a, b in zip(lead_e, q_lead_e))
            if any(d < 0 for d in diff):
                return None
            coeff = c / q_lead_c
            result[(diff, pmono)] = coeff
            for qe, qc in q_rest:
                k = tuple(a + b for a, b in zip(diff, qe))
                if k in rem:
                    s = rem[k] - coeff * qc
                    if s == 0:
                        del rem[k]
                    else:
                        rem[k] = s
                else:
                    rem[k] = -coeff * qc
                    heapq.heappush(heap, heap_key(k))
    return MultiPoly(P.n, result)


def extract_radial_factors(P: MultiPoly) -> Tuple[int, MultiPoly]:
    """Write P = |x|^(2k) * P' with P' not divisible by |x|^2; return (k, P')."""
    if P.is_zero:
        return 0, P
    r2 = MultiPoly.x_norm_sq(P.n)
    k = 0
    while True:
        q = poly_divexact(P, r2)
        if q is None:
            return k, P
        P = q
        k += 1


# -- truncated jets ------------------------------------------------------------


def _binomial_coeff(e: Fraction, k: int) -> Fraction:
    c = Fraction(1)
    for j in range(k):
        c = c * (e - j) / (j + 1)
    return c


@dataclass(frozen=True)
class Jet:
    """A polynomial truncated at total spatial degree ``order``.

    The ring operations agree with operations on the represented smooth
    function modulo O(|x|^(order+1)).
    """

    poly: MultiPoly
    order: int

    def __post_init__(self):
        if self.poly.degree() > self.order:
            object.__setattr__(self, "poly", self.poly.truncate(self.order))

    @property
    def n(self) -> int:
        return self.poly.n

    @staticmethod
    def of(poly: MultiPoly, order: int) -> "Jet":
        return Jet(poly.truncate(order), order)

    @staticmethod
    def const(n: int, c, order: int) -> "Jet":
        return Jet(MultiPoly.const(n, c), order)

    def _check(self, other: "Jet") -> None:
        if self.n != other.n:
            raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")
        if self.order != other.order:
            raise ValueError(f"truncation mismatch: {self.order} vs {other.order}")

    def __add__(self, other: "Jet") -> "Jet":
        self._check(other)
        return Jet(self.poly + other.poly, self.order)

    def __sub__(self, other: "Jet") -> "Jet":
        self._check(other)
        return Jet(self.poly - other.poly, self.order)

    def __neg__(self) -> "Jet":
        return Jet(-self.poly, self.order)

    def __mul__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return Jet(self.poly.mul_truncated(other.poly, self.order), self.order)
        return Jet(self.poly.scale(other), self.order)

    def __rmul__(self, other):
        return self * other

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Jet)
            and self.order == other.order
            and self.poly == other.poly
        )

    def __hash__(self):
        return hash((self.poly, self.order))

    @property
    def is_zero(self) -> bool:
        return self.poly.is_zero

    def diff(self, i: int) -> "Jet":
        # Differentiation loses one certified order.
        return Jet(self.poly.diff(i), self.order - 1)

    def rejet(self, order: int) -> "Jet":
        return Jet(self.poly.truncate(order), order)

    def evaluate(self, point, params=None):
        return self.poly.evaluate(point, params)

    def _unit_correction(self) -> MultiPoly:
        s = self.poly - MultiPoly.const(self.n, 1)
        if not s.spatial_constant_part().is_zero:
            raise ValueError("jet is not a unit with constant part 1")
        return s

    def invert_unit(self) -> "Jet":
        """Inverse of a jet with constant part exactly 1 (geometric series)."""
        s = self._unit_correction()
        out = MultiPoly.const(self.n, 1)
        power = MultiPoly.const(self.n, 1)
        sign = 1
        for _ in range(self.order):
            power = (power * s).truncate(self.order)
            if power.is_zero:
                break
            sign = -sign
            out = out + power.scale(sign)
        return Jet(out, self.order)

    def power_unit(self, exponent) -> "Jet":
        """Binomial series (1 + s)^exponent for a jet 1 + s; exponent rational."""
        e = _as_fraction(exponent)
        s = self._unit_correction()
        out = MultiPoly.const(self.n, 1)
        power = MultiPoly.const(self.n, 1)
        for k in range(1, self.order + 1):
            power = (power * s).truncate(self.order)
            if power.is_zero:
                break
            out = out + power.scale(_binomial_coeff(e, k))
        return Jet(out, self.order)

    def __repr__(self) -> str:
        return f"Jet[D={self.order}]({self.poly!r})"


# -- spherical series ----------------------------------------------------------

# Canonical storage: tuple of (m, P) entries sorted by (total order, m) where
# total order = m + deg P, each P spatially homogeneous and not divisible by
# |x|^2, at most one entry per (total order, parity of m).


@dataclass(frozen=True)
class SphericalSeries:
    """Canonical formal sum of r^m * P(x) graded by total order m + deg P.

    A term (m, P) with P homogeneous of degree d represents the function
    r^(m+d) * P(theta) on rays; the grading by w = m + d is the order of
    vanishing at the origin (w > 0) or decay at infinity (w < 0).  The window
    [order_min, order_max] (either end may be None = unbounded) states which
    orders the series is certified to; arithmetic intersects windows.
    """

    n: int
    terms: Tuple[Tuple[int, MultiPoly], ...]
    order_min: Optional[int] = None
    order_max: Optional[int] = None

    # -- construction --------------------------------------------------------

    @staticmethod
    def canonicalize(
        n: int,
        raw: Iterable[Tuple[int, MultiPoly]],
        order_min: Optional[int] = None,
        order_max: Optional[int] = None,
    ) -> "SphericalSeries":
        """Normal form: split into homogeneous parts, extract |x|^2 factors,
        merge same-order same-parity terms, apply the window."""
        buckets: Dict[Tuple[int, int], List[Tuple[int, MultiPoly]]] = {}
        for m, P in raw:
            if P.is_zero:
                continue
            for d, Pd in P.homogeneous_parts().items():
                w = m + d
                if order_min is not None and w < order_min:
                    continue
                if order_max is not None and w > order_max:
                    continue
                buckets.setdefault((w, m & 1), []).append((m, Pd))
        out: List[Tuple[int, MultiPoly]] = []
        r2 = None
        for (w, _parity), entries in buckets.items():
            m0 = min(m for m, _ in entries)
            merged = MultiPoly.zero(n)
            for m, P in entries:
                if m == m0:
                    merged = merged + P
                else:
                    if r2 is None:
                        r2 = MultiPoly.x_norm_sq(n)
                    merged = merged + P * r2 ** ((m - m0) // 2)
            if merged.is_zero:
                continue
            k, core = extract_radial_factors(merged)
            out.append((m0 + 2 * k, core))
        out.sort(key=lambda t: (t[0] + t[1].degree(), t[0]))
        return SphericalSeries(n, tuple(out), order_min, order_max)

    @staticmethod
    def zero(n: int, order_min=None, order_max=None) -> "SphericalSeries":
        return SphericalSeries(n, (), order_min, order_max)

    @staticmethod
    def from_poly(P: MultiPoly, order_min=None, order_max=None) -> "SphericalSeries":
        return SphericalSeries.canonicalize(P.n, [(0, P)], order_min, order_max)

    @staticmethod
    def from_term(
        m: int, P: MultiPoly, order_min=None, order_max=None
    ) -> "SphericalSeries":
        return SphericalSeries.canonicalize(P.n, [(m, P)], order_min, order_max)

    @staticmethod
    def one(n: int, order_min=None, order_max=None) -> "SphericalSeries":
        return SphericalSeries.from_poly(MultiPoly.const(n, 1), order_min, order_max)

    # -- window plumbing -----------------------------------------------------

    @staticmethod
    def _combine_windows(a: "SphericalSeries", b: "SphericalSeries"):
        mins = [w for w in (a.order_min, b.order_min) if w is not None]
        maxs = [w for w in (a.order_max, b.order_max) if w is not None]
        return (max(mins) if mins else None, min(maxs) if maxs else None)

    def with_window(self, order_min=None, order_max=None) -> "SphericalSeries":
        return SphericalSeries.canonicalize(self.n, self.terms, order_min, order_max)

    # -- ring structure ------------------------------------------------------

    def _check(self, other: "SphericalSeries") -> None:
        if self.n != other.n:
            raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")

    def __add__(self, other: "SphericalSeries") -> "SphericalSeries":
        self._check(other)
        lo, hi = self._combine_windows(self, other)
        return SphericalSeries.canonicalize(
            self.n, list(self.terms) + list(other.terms), lo, hi
        )

    def __neg__(self) -> "SphericalSeries":
        return SphericalSeries(
            self.n,
            tuple((m, -P) for m, P in self.terms),
            self.order_min,
            self.order_max,
        )

    def __sub__(self, other: "SphericalSeries") -> "SphericalSeries":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, SphericalSeries):
            self._check(other)
            lo, hi = self._combine_windows(self, other)
            raw = []
            for m1, P1 in self.terms:
                w1 = m1 + P1.degree()
                for m2, P2 in other.terms:
                    w = w1 + m2 + P2.degree()
                    if lo is not None and w < lo:
                        continue
                    if hi is not None and w > hi:
                        continue
                    raw.append((m1 + m2, P1 * P2))
            return SphericalSeries.canonicalize(self.n, raw, lo, hi)
        if isinstance(other, MultiPoly):
            return self * SphericalSeries.from_poly(other)
        return self.scale(other)

    def __rmul__(self, other):
        return self * other

    def scale(self, c) -> "SphericalSeries":
        c = _as_fraction(c)
        if c == 0:
            return SphericalSeries.zero(self.n, self.order_min, self.order_max)
        return SphericalSeries(
            self.n,
            tuple((m, P.scale(c)) for m, P in self.terms),
            self.order_min,
            self.order_max,
        )

    def scale_poly(self, P: MultiPoly) -> "SphericalSeries":
        return self * SphericalSeries.from_poly(P)

    def shift(self, k: int) -> "SphericalSeries":
        """Multiply by r^k (k may be negative)."""
        return SphericalSeries(
            self.n,
            tuple((m + k, P) for m, P in self.terms),
            None if self.order_min is None else self.order_min + k,
            None if self.order_max is None else self.order_max + k,
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SphericalSeries)
            and self.n == other.n
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.n, self.terms))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def orders(self) -> List[int]:
        return sorted({m + P.degree() for m, P in self.terms})

    def leading_order(self, at_infinity: bool = False) -> Optional[int]:
        os = self.orders()
        if not os:
            return None
        return os[-1] if at_infinity else os[0]

    # -- units ---------------------------------------------------------------

    def _unit_split(self, at_infinity: bool):
        """Split c * r^m0 * (1 + s) at the dominant end; return (c, m0, s)."""
        if not self.terms:
            raise ValueError("zero series is not invertible")
        w0 = self.leading_order(at_infinity)
        lead = [(m, P) for m, P in self.terms if m + P.degree() == w0]
        if len(lead) != 1 or lead[0][1].degree() != 0:
            raise ValueError("leading term is not a constant multiple of r^m")
        m0, P0 = lead[0]
        c = P0.constant_term()
        if c == 0 or len(P0.terms) != 1:
            raise ValueError("leading coefficient must be a nonzero rational")
        if at_infinity and self.order_min is None:
            raise ValueError("series at infinity needs a finite order_min")
        if not at_infinity and self.order_max is None:
            raise ValueError("series at the origin needs a finite order_max")
        s = (self.shift(-m0)).scale(Fraction(1) / c) - SphericalSeries.one(
            self.n,
            None if self.order_min is None else self.order_min - m0,
            None if self.order_max is None else self.order_max - m0,
        )
        return c, m0, s

    def invert_unit(self, at_infinity: bool = False) -> "SphericalSeries":
        """Multiplicative inverse when the dominant term is c * r^m0."""
        c, m0, s = self._unit_split(at_infinity)
        lo = None if self.order_min is None else self.order_min - m0
        hi = None if self.order_max is None else self.order_max - m0
        out = SphericalSeries.one(self.n, lo, hi)
        power = SphericalSeries.one(self.n, lo, hi)
        sign = 1
        while True:
            power = power * s
            if power.is_zero:
                break
            sign = -sign
            out = out + power.scale(sign)
        return out.scale(Fraction(1) / c).shift(-m0)

    def power_unit(self, exponent, at_infinity: bool = False) -> "SphericalSeries":
        """Binomial series for (r^m0 * (1 + s))^exponent; needs unit constant 1."""
        e = _as_fraction(exponent)
        c, m0, s = self._unit_split(at_infinity)
        if c != 1:
            raise ValueError("power_unit requires unit leading coefficient 1")
        shift_total = e * m0
        if shift_total.denominator != 1:
            raise ValueError("fractional radial power in result")
        lo = None if self.order_min is None else self.order_min - m0
        hi = None if self.order_max is None else self.order_max - m0
        out = SphericalSeries.one(self.n, lo, hi)
        power = SphericalSeries.one(self.n, lo, hi)
        k = 0
        while True:
            power = power * s
            k += 1
            if power.is_zero:
                break
            out = out + power.scale(_binomial_coeff(e, k))
        return out.shift(int(shift_total))

    # -- grading and calculus --------------------------------------------------

    def coefficient(self, order: int) -> "SphericalSeries":
        """The angular coefficient at a total order, as an order-0 series."""
        picked = [
            (m - order, P) for m, P in self.terms if m + P.degree() == order
        ]
        return SphericalSeries.canonicalize(self.n, picked, 0, 0)

    def order_coefficients(self) -> Dict[int, "SphericalSeries"]:
        return {w: self.coefficient(w) for w in self.orders()}

    def radial_derivative(self) -> "SphericalSeries":
        """d/dr at fixed direction: r^w P(theta) -> w r^(w-1) P(theta)."""
        raw = []
        for m, P in self.terms:
            w = m + P.degree()
            if w != 0:
                raw.append((m - 1, P.scale(w)))
        return SphericalSeries.canonicalize(
            self.n,
            raw,
            None if self.order_min is None else self.order_min - 1,
            None if self.order_max is None else self.order_max - 1,
        )

    def subs_params(self, values: Mapping[str, Fraction]) -> "SphericalSeries":
        """Substitute exact values for parameters in every coefficient."""
        return SphericalSeries.canonicalize(
            self.n,
            [(m, P.subs_params(values)) for m, P in self.terms],
            self.order_min,
            self.order_max,
        )

    # -- evaluation ------------------------------------------------------------

    def evaluate(self, point: Sequence[float], params=None) -> float:
        import math

        r2 = sum(float(x) * float(x) for x in point)
        r = math.sqrt(r2)
        total = 0.0
        for m, P in self.terms:
            total += r**m * float(P.evaluate([float(x) for x in point], params))
        return total

    def __repr__(self) -> str:
        bits = [f"r^{m}*[{P!r}]" for m, P in self.terms]
        win = f" window=[{self.order_min},{self.order_max}]"
        return "SphericalSeries(" + (" + ".join(bits) or "0") + win + ")"


def radial_laplacian_term(m: int, P: MultiPoly, n: int) -> SphericalSeries:
    """Euclidean Laplacian of r^m * P for homogeneous P of degree d.

    Delta(r^m P) = m (m + 2d + n - 2) r^(m-2) P + r^m Delta(P).
    """
    if not P.is_homogeneous():
        raise ValueError("P must be homogeneous")
    if P.n != n:
        raise ValueError("dimension mismatch")
    d = max(P.degree(), 0)
    raw = []
    if m != 0:
        raw.append((m - 2, P.scale(m * (m + 2 * d + n - 2))))
    raw.append((m, P.laplacian()))
    return SphericalSeries.canonicalize(n, raw)


# -- JSON interchange ----------------------------------------------------------
#
# Polynomials travel as a list of {"exp": [e1..en] or [e1..en, eH],
# "num": "...", "den": "..."}.  An exponent list of length n+1 uses the last
# slot for the power of the curvature parameter H, which has spatial degree
# zero by convention.


def poly_to_json(P: MultiPoly) -> list:
    extra = P.param_names()
    if extra - {"H"}:
        raise ValueError(f"only the H parameter is serializable, got {extra}")
    use_h = "H" in extra
    out = []
    for (e, p), c in sorted(P.terms.items(), key=lambda kv: _grlex_key(kv[0])):
        exp = list(e)
        if use_h:
            exp.append(dict(p).get("H", 0))
        out.append({"exp": exp, "num": str(c.numerator), "den": str(c.denominator)})
    return out


def poly_from_json(data: list, n: int) -> MultiPoly:
    terms: Dict[Key, Fraction] = {}
    for entry in data:
        exp = list(entry["exp"])
        if len(exp) == n + 1:
            h = exp.pop()
        elif len(exp) == n:
            h = 0
        else:
            raise ValueError(f"exponent list of length {len(exp)} for n={n}")
        params: Params = ((("H", h),) if h else _NO_PARAMS)
        c = Fraction(int(entry["num"]), int(entry["den"]))
        key = (tuple(int(v) for v in exp), params)
        terms[key] = terms.get(key, Fraction(0)) + c
    return MultiPoly.make(n, terms)
