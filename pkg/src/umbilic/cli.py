"""Command-line front end: surface fixtures, verification suites, mass
sweeps, decay fits, and machine-readable reports.

Exit codes: 0 on success, 1 when a verification target fails, 2 on usage
or parse errors (including chart preconditions).  Reports are rendered by
a deterministic serializer (sorted keys, floats at 17 significant
digits), so identical configuration and seed give byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from typing import List, Optional, Sequence

from . import asymptotic, conformal, mass, obstruction
from .asymptotic import ChartRequirementError
from .polyjet import MultiPoly, poly_to_json
from .quadrature import QuadratureRule, default_degree
from .surface import GraphSurface, NotUmbilical, verify_rho_identities

USAGE_ERROR = 2
CHECK_FAILED = 1

FIT_QUALITY_THRESHOLD = 0.99
DECAY_TOLERANCE = 0.3
EXPECTED_DECAY = {asymptotic.INVERTED_Y: 2.0, asymptotic.CORRECTED_Z: 4.0}
RHO_TOLERANCE = 1e-7


class UsageError(Exception):
    """Configuration problems surfaced as exit code 2."""


# -- deterministic serialization -------------------------------------------------


def _render(obj, out: List[str]) -> None:
    if isinstance(obj, dict):
        out.append("{")
        for i, k in enumerate(sorted(obj)):
            if i:
                out.append(", ")
            out.append(json.dumps(str(k)))
            out.append(": ")
            _render(obj[k], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _render(v, out)
        out.append("]")
    elif isinstance(obj, bool) or obj is None:
        out.append(json.dumps(obj))
    elif isinstance(obj, float):
        if obj != obj or obj in (float("inf"), float("-inf")):
            out.append(json.dumps(obj))  # Infinity / -Infinity / NaN
        else:
            out.append(format(obj, ".17g"))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, Fraction):
        out.append(json.dumps(str(obj)))
    else:
        out.append(json.dumps(str(obj)))


def dumps(obj) -> str:
    """JSON text with sorted keys and floats at 17 significant digits."""
    out: List[str] = []
    _render(obj, out)
    return "".join(out)


def _csv_text(rows: Sequence[Sequence[object]]) -> str:
    lines = []
    for row in rows:
        cells = [
            format(c, ".17g") if isinstance(c, float) else str(c) for c in row
        ]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- configuration ---------------------------------------------------------------


def _load_surface(args) -> GraphSurface:
    if getattr(args, "poly", None):
        try:
            with open(args.poly) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read surface file {args.poly}: {exc}")
        if args.n is not None and int(data.get("n", args.n)) != args.n:
            raise UsageError("--n disagrees with the surface file")
        try:
            return GraphSurface.from_json(data, order=args.order)
        except (ValueError, KeyError) as exc:
            raise UsageError(f"bad surface description: {exc}")
    if getattr(args, "builtin", None):
        if args.n is None:
            raise UsageError("--n is required with --builtin")
        try:
            return GraphSurface.builtin(
                args.builtin, args.n, order=args.order,
                radius=Fraction(args.radius),
            )
        except ValueError as exc:
            raise UsageError(str(exc))
    raise UsageError("one of --builtin or --poly is required")


def _chart(S: GraphSurface, flag: str) -> asymptotic.Chart:
    try:
        return asymptotic.chart_for(S, flag)
    except ChartRequirementError as exc:
        # chart preconditions are configuration problems, not check failures
        raise UsageError(str(exc))


def _radii(args) -> List[float]:
    if args.radii:
        try:
            vals = [float(tok) for tok in args.radii.split(",")]
        except ValueError:
            raise UsageError(f"bad --radii value {args.radii!r}")
        if any(v <= 0 for v in vals):
            raise UsageError("radii must be positive")
        return vals
    return list(mass.DEFAULT_RADII)


def _series_json(s) -> list:
    return [{"radial_power": m, "poly": poly_to_json(P)} for m, P in s.terms]


# -- subcommands -----------------------------------------------------------------


def cmd_verify(args) -> int:
    S = _load_surface(args)
    if not S.symbolic:
        raise UsageError("verification needs a polynomial surface")
    try:
        report = obstruction.expansion_coefficients(S.f_jet, W=args.window)
    except (NotUmbilical, obstruction.NotUmbilicalJet) as exc:
        raise UsageError(str(exc))
    lead = conformal.leading_order_of_R(S, W=args.window)
    verdict = conformal.classify_integrability(S.n, lead)

    dirs = conformal.probe_directions(S.n, count=8, seed=args.seed)
    rho_max = 0.0
    for d in dirs:
        res = verify_rho_identities(S, 0.05 * d)
        rho_max = max(rho_max, res.max())
    rho_ok = rho_max < RHO_TOLERANCE

    out = {
        "surface": S.to_json(),
        "checks": report.to_json(),
        "integrability": {"n": S.n, "k": lead.k, "verdict": verdict},
        "rho_identities": {"max_residual": rho_max, "ok": rho_ok},
    }
    ok = report.all_identities_hold and rho_ok
    out["ok"] = ok
    _emit(dumps(out) + "\n", args.out)
    return 0 if ok else CHECK_FAILED


def cmd_mass(args) -> int:
    if args.fixture:
        if args.fixture != "schwarzschild":
            raise UsageError(f"unknown fixture {args.fixture!r}")
        n = args.n if args.n is not None else 3
        source: mass.MetricSource = mass.SchwarzschildField(mass=args.m, n=n)
        chart = None
        chart_kind = asymptotic.INVERTED_Y
        surface_json: object = f"schwarzschild(m={args.m})"
        cancellation = None
    else:
        S = _load_surface(args)
        n = S.n
        chart = _chart(S, args.chart)
        chart_kind = chart.kind
        surface_json = S.to_json()
        if S.symbolic:
            cancellation = mass.symbolic_mass_cancellation(
                S.f_jet, chart_kind
            ).to_json()
        else:
            cancellation = None
        source = S

    radii = _radii(args)
    if len(radii) < 4:
        raise UsageError("at least four radii are required for extrapolation")
    deg = args.quad_deg if args.quad_deg else default_degree(n)
    rule = QuadratureRule.sphere(n, deg)
    sweep = mass.mass_sweep(source, chart, radii, args.formula, rule)
    fit = mass.extrapolate_mass(sweep)

    out = {
        "surface": surface_json,
        "chart": chart_kind,
        "formula": args.formula,
        "sweeps": [e.to_json() for e in sweep],
        "m_inf": fit.m_inf,
        "decay_exponent": fit.decay_exponent,
        "fit_quality": fit.fit_quality,
        "symbolic_cancellation": cancellation,
    }
    if args.format == "csv":
        rows = [["radius", "mass"]] + [[e.radius, e.value] for e in sweep]
        _emit(_csv_text(rows), args.out)
    else:
        _emit(dumps(out) + "\n", args.out)
    return 0 if fit.fit_quality >= FIT_QUALITY_THRESHOLD else CHECK_FAILED


def cmd_decay(args) -> int:
    S = _load_surface(args)
    chart = _chart(S, args.chart)
    fit = asymptotic.decay_order_estimate(S, chart, _radii(args), seed=args.seed)
    expected = EXPECTED_DECAY[chart.kind]
    ok = fit.tau_hat >= expected - DECAY_TOLERANCE
    out = {
        "surface": S.to_json() if S.symbolic else S.name,
        "expected_order": expected,
        "ok": ok,
        "fit": fit.to_json(),
    }
    if args.format == "csv":
        _emit(_csv_text(fit.csv_rows()), args.out)
    else:
        _emit(dumps(out) + "\n", args.out)
    return 0 if ok else CHECK_FAILED


def cmd_expand(args) -> int:
    S = _load_surface(args)
    if not S.symbolic:
        raise UsageError("expansion needs a polynomial surface")
    try:
        series = obstruction.script_R_series(S.f_jet, W=args.window)
    except (NotUmbilical, obstruction.NotUmbilicalJet) as exc:
        raise UsageError(str(exc))
    coeffs = [
        {"order": w, "coefficient": _series_json(series.coefficient(w))}
        for w in range(0, args.window + 1)
    ]
    out = {
        "surface": S.to_json(),
        "window": args.window,
        "coefficients": coeffs,
    }
    _emit(dumps(out) + "\n", args.out)
    return 0


def cmd_ctheta(args) -> int:
    S = _load_surface(args)
    if not S.symbolic:
        raise UsageError("the obstruction function needs a polynomial surface")
    try:
        _, parts = obstruction._decompose_umbilical(S.f_jet.poly)
    except (NotUmbilical, obstruction.NotUmbilicalJet) as exc:
        raise UsageError(str(exc))
    A3 = parts.get(3, MultiPoly.zero(S.n))
    ct = obstruction.c_theta(A3)
    out = {
        "surface": S.to_json(),
        "cubic_coefficient": poly_to_json(A3),
        "c_theta": _series_json(ct),
        "identically_zero": ct.is_zero,
    }
    _emit(dumps(out) + "\n", args.out)
    return 0


# -- parser ----------------------------------------------------------------------


def _add_surface_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--builtin", choices=["flat", "sphere", "quartic_x1", "cubic_x1"])
    p.add_argument("--poly", help="surface description JSON file")
    p.add_argument("--radius", default="1", help="sphere radius (rational)")


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=None, help="ambient graph dimension")
    p.add_argument("--order", type=int, default=7, help="jet truncation order")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--format", choices=["json", "csv"], default="json")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="umbilic",
        description="verify curvature expansions, decay, and mass integrals "
        "of inverted graph hypersurfaces",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    pv = sub.add_parser("verify", help="run the exact identity suite")
    _add_surface_flags(pv)
    _add_common_flags(pv)
    pv.add_argument("--window", type=int, default=3, help="expansion window")
    pv.set_defaults(fn=cmd_verify)

    pm = sub.add_parser("mass", help="mass sweep and extrapolation")
    _add_surface_flags(pm)
    _add_common_flags(pm)
    pm.add_argument("--fixture", help="use a reference metric, e.g. schwarzschild")
    pm.add_argument("--m", type=float, default=1.0, help="fixture mass")
    pm.add_argument("--chart", choices=["y", "z"], default="y")
    pm.add_argument("--radii", help="comma-separated sweep radii")
    pm.add_argument("--quad-deg", type=int, default=None)
    pm.add_argument(
        "--formula",
        choices=[mass.STANDARD, mass.LEE_PARKER],
        default=mass.STANDARD,
    )
    pm.set_defaults(fn=cmd_mass)

    pd = sub.add_parser("decay", help="fit the metric deviation decay order")
    _add_surface_flags(pd)
    _add_common_flags(pd)
    pd.add_argument("--chart", choices=["y", "z"], default="y")
    pd.add_argument("--radii", help="comma-separated sweep radii")
    pd.set_defaults(fn=cmd_decay)

    pe = sub.add_parser("expand", help="dump the curvature expansion")
    _add_surface_flags(pe)
    _add_common_flags(pe)
    pe.add_argument("--window", type=int, default=3)
    pe.set_defaults(fn=cmd_expand)

    pc = sub.add_parser("ctheta", help="dump the obstruction function")
    _add_surface_flags(pc)
    _add_common_flags(pc)
    pc.set_defaults(fn=cmd_ctheta)

    return ap


def _cap_threads() -> None:
    cap = os.environ.get("UMBILIC_THREADS")
    if not cap:
        return
    for var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        os.environ.setdefault(var, cap)


def main(argv: Optional[Sequence[str]] = None) -> int:
    _cap_threads()
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
