"""Command-line front end.

Problem data can come from flags or from a UTF-8 key=value file (flags win).
Reports are single-line JSON by default, a human table with --pretty, or CSV
with --format csv.  Exit codes: 0 success, 2 tolerance failure, 3 bad spec.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import fields as dc_fields

import numpy as np

from . import expr as ex
from . import greenkernel as gk
from . import integrate as intg
from . import special
from .clifford import word_string
from .superfun import SuperContext, SuperFunctionError, parse_superfunction

SCHEMA = 1

# comparison tolerance when --tol is not given, by command
_DEFAULT_CHECK_TOL = {
    "volume": 1e-6,
    "surface": 1e-6,
    "pizzetti": 1e-6,
    "stokes": 1e-4,
    "cauchy-pompeiu": 1e-3,
}


class SpecError(ValueError):
    """Problem description is unusable (exit code 3)."""


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exit code collides with ours
        self.exit(3, f"{self.prog}: error: {message}\n")


def _add_common(p):
    p.add_argument("problem", nargs="?", help="optional key=value problem file")
    p.add_argument("--m", type=int, help="bosonic dimension")
    p.add_argument("--n", type=int, help="number of fermionic pairs")
    p.add_argument("--phase", help="even superfunction g; the region is "
                   "{g <= 0}, its boundary {g = 0}")
    p.add_argument("--constraint", action="append", default=None,
                   help="bosonic expression w cutting the region to w <= 0 "
                   "(repeatable)")
    p.add_argument("--axis", metavar="XK",
                   help="rotation axis hint; the axial backend expects the "
                   "last coordinate")
    p.add_argument("--integrand", help="superfunction to integrate "
                   "(stokes: two functions separated by ';')")
    p.add_argument("--backend",
                   choices=["auto", "radial", "axial", "levelset", "grid"])
    p.add_argument("--tol", type=float,
                   help="quadrature and comparison tolerance")
    p.add_argument("--box", type=float, help="bounding-box half-width")
    p.add_argument("--param", action="append", default=None, metavar="K=V",
                   help="named number (R, h, y1..ym, ...); engine knobs like "
                   "angular or grid_res are forwarded to the backends")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--pretty", action="store_true",
                   help="human-readable table instead of JSON")
    p.add_argument("--threads", type=int)
    p.add_argument("--seed", type=int)


def build_parser() -> _Parser:
    top = _Parser(prog="superint",
                  description="distribution-based integration in superspace")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("volume", parents=[], help="integral over {phase <= 0}")
    _add_common(p)
    p = sub.add_parser("surface", help="integral over {phase = 0}")
    _add_common(p)
    p.add_argument("--oriented", action="store_true",
                   help="Clifford vector measure instead of the scalar one")
    p = sub.add_parser("pizzetti",
                       help="supersphere integral vs. the Laplacian series")
    _add_common(p)
    p = sub.add_parser("stokes",
                       help="both sides of the integration-by-parts identity")
    _add_common(p)
    p = sub.add_parser("cauchy-pompeiu",
                       help="reproduction identity at a bosonic source point")
    _add_common(p)

    p = sub.add_parser("catalog", help="closed-form volumes and areas")
    p.add_argument("shape",
                   choices=["ball", "sphere", "paraboloid", "hyperboloid"])
    p.add_argument("kind", choices=["volume", "area"])
    _add_common(p)

    p = sub.add_parser("verify", help="run built-in verification suites")
    p.add_argument("suite", nargs="?", default="all",
                   help="all, quick, or a suite name")
    _add_common(p)
    return top


def _read_problem_file(path: str) -> dict:
    data = {"constraint": [], "param": []}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for raw in fh:
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise SpecError(f"problem file line without '=': {line!r}")
                key, val = line.split("=", 1)
                key = key.strip()
                val = val.strip()
                if key in ("constraint", "param"):
                    data[key].append(val)
                else:
                    data[key] = val
    except OSError as exc:
        raise SpecError(f"cannot read problem file: {exc}") from None
    return data


def _merge_problem(args) -> None:
    """File values fill in whatever the flags left unset."""
    if not getattr(args, "problem", None):
        return
    data = _read_problem_file(args.problem)
    for key in ("m", "n"):
        if getattr(args, key) is None and key in data:
            setattr(args, key, int(data[key]))
    for key in ("phase", "integrand", "backend", "axis"):
        if getattr(args, key, None) is None and key in data:
            setattr(args, key, data[key])
    for key in ("tol", "box"):
        if getattr(args, key) is None and key in data:
            setattr(args, key, float(data[key]))
    for key in ("threads", "seed"):
        if getattr(args, key) is None and key in data:
            setattr(args, key, int(data[key]))
    if args.constraint is None and data["constraint"]:
        args.constraint = list(data["constraint"])
    if data["param"]:
        args.param = list(data["param"]) + (args.param or [])
    if getattr(args, "oriented", None) is False and data.get("oriented"):
        args.oriented = data["oriented"].lower() in ("1", "true", "yes")


def _parse_params(pairs) -> dict:
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise SpecError(f"--param needs K=V, got {item!r}")
        key, val = item.split("=", 1)
        key = key.strip()
        try:
            if "," in val:
                out[key] = [float(v) for v in val.split(",")]
            else:
                out[key] = float(val)
        except ValueError:
            raise SpecError(f"--param value is not a number: {item!r}") from None
    return out


_OPT_FIELDS = {f.name: f.type for f in dc_fields(intg.Options)}


def _build_options(args, params: dict) -> intg.Options:
    kw = {}
    if args.backend:
        kw["backend"] = args.backend
    if args.tol is not None:
        kw["tol"] = args.tol
    if args.box is not None:
        kw["box"] = args.box
    if args.threads is not None:
        kw["threads"] = args.threads
    if args.seed is not None:
        kw["seed"] = args.seed
    defaults = intg.Options()
    for key, val in params.items():
        if key in kw or key in ("backend", "tol", "box", "threads", "seed"):
            continue
        if key in _OPT_FIELDS and not isinstance(val, list):
            kw[key] = type(getattr(defaults, key))(val)
    return intg.Options(**kw)


def _context(args) -> SuperContext:
    if args.m is None or args.n is None:
        raise SpecError("--m and --n are required")
    if args.m < 1 or args.n < 0:
        raise SpecError("need m >= 1 and n >= 0")
    return SuperContext(args.m, args.n)


def _parse_sf(ctx, text, params, what):
    if not text:
        raise SpecError(f"missing {what}")
    try:
        return parse_superfunction(ctx, text, params)
    except (SuperFunctionError, ex.ExprError, ValueError) as exc:
        raise SpecError(f"cannot parse {what}: {exc}") from None


def _parse_constraints(ctx, args, params) -> tuple:
    out = []
    for text in args.constraint or []:
        sf = _parse_sf(ctx, text, params, "constraint")
        if set(sf.comps) - {0}:
            raise SpecError("constraints must be purely bosonic")
        # the command line says "keep w <= 0"; the engine keeps -w >= 0
        out.append(ex.neg(sf.body))
    return tuple(out)


def _apply_axis_hint(args, ctx) -> None:
    if getattr(args, "axis", None) is None:
        return
    name = args.axis.strip().lower()
    if name != f"x{ctx.m}":
        raise SpecError(f"--axis must name the last coordinate x{ctx.m}; "
                        "rotational profiles are taken about it")
    if args.backend in (None, "auto"):
        args.backend = "axial"


def _check_tol(args) -> float:
    if args.tol is not None:
        return args.tol
    return _DEFAULT_CHECK_TOL.get(args.command, 1e-6)


# ---------------------------------------------------------------------------
# closed-form recognition
# ---------------------------------------------------------------------------

def _match_catalog(ctx, phase, constraints, kind):
    """Return (shape, parameter, closed_form_value) when the phase describes
    a catalog shape, else None."""
    m, n = ctx.m, ctx.n
    env0 = {j: 0.0 for j in range(1, m + 1)}
    try:
        if not constraints:
            r2 = -float(ex.evaluate(phase.body, env0))
            if r2 > 0:
                ref = -(ctx.x_squared()) - r2
                if phase.equals(ref, 1e-11):
                    radius = math.sqrt(r2)
                    shape = "ball" if kind == "volume" else "sphere"
                    return (shape, radius,
                            special.catalog(shape, kind, m, n, radius).value)
        elif len(constraints) == 1 and m >= 2:
            h = float(ex.evaluate(constraints[0], env0))
            if h > 0 and ex.exprs_equal(constraints[0],
                                        ex.add(ex.Const(h), ex.neg(ex.var(m)))):
                ref = -(ctx.hat_squared()) - ctx.coordinate(m)
                if phase.equals(ref, 1e-11):
                    return ("paraboloid", h,
                            special.catalog("paraboloid", kind, m, n, h).value)
        elif len(constraints) == 2 and m >= 2:
            h = float(ex.evaluate(constraints[0], env0))
            lo = ex.add(ex.Const(h), ex.neg(ex.var(m)))
            hi = ex.add(ex.Const(h), ex.var(m))
            pair_ok = h > 0 and (
                (ex.exprs_equal(constraints[0], lo) and ex.exprs_equal(constraints[1], hi))
                or (ex.exprs_equal(constraints[0], hi) and ex.exprs_equal(constraints[1], lo)))
            if pair_ok:
                ref = -(ctx.hat_squared()) - ctx.coordinate(m) ** 2 - 1
                if phase.equals(ref, 1e-11):
                    return ("hyperboloid", h,
                            special.catalog("hyperboloid", kind, m, n, h).value)
    except (ValueError, ArithmeticError):
        return None
    return None


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _word_map(ctx, by_word) -> dict:
    return {word_string(ctx.m, w): v for w, v in sorted(by_word.items())}


def _run_volume(args):
    params = _parse_params(args.param)
    ctx = _context(args)
    _apply_axis_hint(args, ctx)
    opts = _build_options(args, params)
    phase = _parse_sf(ctx, args.phase, params, "phase")
    constraints = _parse_constraints(ctx, args, params)
    integrand = None
    if args.integrand:
        integrand = _parse_sf(ctx, args.integrand, params, "integrand")
    res = intg.domain_integral(ctx, phase, integrand, constraints, opts)
    report = {
        "schema": SCHEMA, "command": "volume", "m": ctx.m, "n": ctx.n,
        "M": ctx.superdim, "value": res.value, "backend": res.backend,
        "error_estimate": opts.tol,
    }
    code = 0
    if integrand is None:
        hit = _match_catalog(ctx, phase, constraints, "volume")
        if hit:
            shape, param, closed = hit
            dev = abs(res.value - closed)
            report.update(shape=shape, shape_parameter=param,
                          closed_form=closed, deviation=dev)
            report["error_estimate"] = max(opts.tol, dev)
            if dev > _check_tol(args):
                code = 2
    return report, code


def _run_surface(args):
    params = _parse_params(args.param)
    ctx = _context(args)
    _apply_axis_hint(args, ctx)
    opts = _build_options(args, params)
    phase = _parse_sf(ctx, args.phase, params, "phase")
    constraints = _parse_constraints(ctx, args, params)
    integrand = None
    if args.integrand:
        integrand = _parse_sf(ctx, args.integrand, params, "integrand")
    res = intg.surface_integral(ctx, phase, integrand,
                                oriented=args.oriented,
                                constraints=constraints, opts=opts)
    report = {
        "schema": SCHEMA, "command": "surface", "m": ctx.m, "n": ctx.n,
        "M": ctx.superdim, "oriented": bool(args.oriented),
        "value": res.value, "backend": res.backend,
        "error_estimate": opts.tol,
    }
    if args.oriented:
        report["by_word"] = _word_map(ctx, res.by_word)
    code = 0
    if integrand is None and not args.oriented:
        hit = _match_catalog(ctx, phase, constraints, "area")
        if hit:
            shape, param, closed = hit
            dev = abs(res.value - closed)
            report.update(shape=shape, shape_parameter=param,
                          closed_form=closed, deviation=dev)
            report["error_estimate"] = max(opts.tol, dev)
            if dev > _check_tol(args):
                code = 2
    return report, code


def _run_pizzetti(args):
    params = _parse_params(args.param)
    ctx = _context(args)
    opts = _build_options(args, params)
    poly = _parse_sf(ctx, args.integrand, params, "integrand")
    for mask, e in poly.comps.items():
        if ex.as_polynomial(e, ctx.m) is None:
            raise SpecError("pizzetti needs a polynomial integrand")
    radius = float(params.get("R", 1.0))
    engine = intg.supersphere_integral(ctx, poly, radius=radius, opts=opts)
    if radius == 1.0:
        series = special.pizzetti_sphere_integral(poly)
    else:
        series = None
    report = {
        "schema": SCHEMA, "command": "pizzetti", "m": ctx.m, "n": ctx.n,
        "M": ctx.superdim, "radius": radius, "value": engine.value,
        "backend": engine.backend, "error_estimate": opts.tol,
    }
    code = 0
    if series is not None:
        dev = abs(engine.value - series)
        report.update(closed_form=series, deviation=dev)
        report["error_estimate"] = max(opts.tol, dev)
        if dev > _check_tol(args) * (1.0 + abs(series)):
            code = 2
    return report, code


def _run_stokes(args):
    params = _parse_params(args.param)
    ctx = _context(args)
    opts = _build_options(args, params)
    phase = _parse_sf(ctx, args.phase, params, "phase")
    if not args.integrand or ";" not in args.integrand:
        raise SpecError("stokes needs --integrand \"F ; G\"")
    left_text, right_text = args.integrand.split(";", 1)
    F = _parse_sf(ctx, left_text, params, "left integrand")
    G = _parse_sf(ctx, right_text, params, "right integrand")
    backend = None if (args.backend in (None, "auto")) else args.backend
    lhs, rhs = gk.stokes_sides(ctx, phase, F, G, opts, volume_backend=backend)
    words = set(lhs) | set(rhs)
    dev = max((abs(lhs.get(w, 0.0) - rhs.get(w, 0.0)) for w in words),
              default=0.0)
    report = {
        "schema": SCHEMA, "command": "stokes", "m": ctx.m, "n": ctx.n,
        "M": ctx.superdim, "value": dev,
        "volume_side": _word_map(ctx, lhs), "boundary_side": _word_map(ctx, rhs),
        "error_estimate": dev,
    }
    return report, (0 if dev <= _check_tol(args) else 2)


def _run_cauchy_pompeiu(args):
    params = _parse_params(args.param)
    ctx = _context(args)
    opts = _build_options(args, params)
    phase = _parse_sf(ctx, args.phase, params, "phase")
    G = _parse_sf(ctx, args.integrand, params, "integrand")
    if "y" in params:
        y = params["y"] if isinstance(params["y"], list) else [params["y"]]
    else:
        y = [params.get(f"y{k}", 0.0) for k in range(1, ctx.m + 1)]
    y = np.asarray(y, dtype=float)
    if y.shape != (ctx.m,):
        raise SpecError("source point y needs m components")
    body_at_y = float(ex.evaluate(phase.body,
                                  {k + 1: y[k] for k in range(ctx.m)}))
    if body_at_y == 0.0:
        raise SpecError("source point lies on the boundary")
    interior = body_at_y < 0.0
    result = gk.cauchy_pompeiu(ctx, phase, G, y, opts)
    expected = gk.reproduction_target(ctx, G, y) if interior else {}
    words = set(result) | set(expected)
    dev = max((abs(result.get(w, 0.0) - expected.get(w, 0.0)) for w in words),
              default=0.0)
    scale = 1.0 + max((abs(v) for v in expected.values()), default=0.0)
    report = {
        "schema": SCHEMA, "command": "cauchy-pompeiu", "m": ctx.m, "n": ctx.n,
        "M": ctx.superdim, "source": [float(v) for v in y],
        "interior": interior, "value": dev,
        "result": _word_map(ctx, result),
        "expected": _word_map(ctx, expected),
        "error_estimate": dev,
    }
    return report, (0 if dev <= _check_tol(args) * scale else 2)


def _run_catalog(args):
    params = _parse_params(args.param)
    if args.m is None or args.n is None:
        raise SpecError("--m and --n are required")
    key = "R" if args.shape in ("ball", "sphere") else "h"
    param = float(params.get(key, params.get("param", 1.0)))
    try:
        cf = special.catalog(args.shape, args.kind, args.m, args.n, param)
    except (KeyError, ValueError, special.GammaPoleError) as exc:
        raise SpecError(str(exc)) from None
    report = {
        "schema": SCHEMA, "command": "catalog", "shape": cf.shape,
        "kind": cf.kind, "m": cf.m, "n": cf.n, "M": args.m - 2 * args.n,
        "parameter": cf.param, "value": cf.value,
        "zero_branch": cf.is_zero_branch,
    }
    return report, 0


# ---------------------------------------------------------------------------
# verify suites
# ---------------------------------------------------------------------------

def _close(a, b, tol):
    return abs(a - b) <= tol


def _suite_gamma():
    checks = []
    pairs = [(1, math.sqrt(math.pi)), (3, math.sqrt(math.pi) / 2),
             (-1, -2 * math.sqrt(math.pi)), (4, 1.0), (8, 6.0)]
    for two_a, want in pairs:
        got = special.gamma_half(two_a)
        ok = abs(got - want) <= 1e-13 * abs(want)
        checks.append((f"gamma({two_a}/2)", ok, f"{got!r} vs {want!r}"))
    return checks


def _suite_special():
    checks = []
    for (a, b, c, z) in [(-0.5, 1.0, 2.5, -3.0), (0.5, 1.5, 2.0, -0.7),
                         (1.0, 2.0, 3.5, 0.4)]:
        s = special.hyp2f1(a, b, c, z)
        e = special.hyp2f1_euler(a, b, c, z)
        checks.append((f"2F1({a},{b};{c};{z})", _close(s, e, 1e-8),
                       f"{s!r} vs {e!r}"))
    for (a, b1, b2, c, z1, z2) in [(0.5, -0.5, 1.0, 1.5, -2.0, -1.0),
                                   (1.0, 0.5, 0.5, 2.5, -0.5, 0.3)]:
        s = special.appell_f1(a, b1, b2, c, z1, z2)
        e = special.appell_f1_euler(a, b1, b2, c, z1, z2)
        checks.append((f"F1({a};{b1},{b2};{c};{z1},{z2})",
                       _close(s, e, 1e-8), f"{s!r} vs {e!r}"))
    return checks


def _suite_jets():
    from .jets import JetSeries, compose_jets, invert_jet
    rng = np.random.default_rng(7)
    checks = []
    worst = 0.0
    for _ in range(20):
        order = int(rng.integers(2, 9))
        # a layer phase crosses zero transversally (slope away from 0) and is
        # analytic (Taylor coefficients damped by 1/k!); wilder jets would
        # only measure floating-point conditioning, not the inversion
        slope = float(rng.uniform(0.7, 2.0)) * (1 if rng.random() < 0.5 else -1)
        coeffs = [float(rng.normal()), slope]
        coeffs += [float(rng.normal()) / math.factorial(k)
                   for k in range(2, order + 1)]
        phi = JetSeries(coeffs, order)
        s = invert_jet(phi)
        back = compose_jets(phi, s)
        target = [phi.coeffs[0], 1.0] + [0.0] * (order - 1)
        worst = max(worst, max(abs(a - b) for a, b in zip(back.coeffs, target)))
    checks.append(("invert(jet) round trip", worst <= 1e-12, f"max dev {worst:.2e}"))
    return checks


def _suite_ball():
    checks = []
    opts = intg.Options()
    for (m, n) in [(2, 1), (3, 1), (2, 2)]:
        ctx = SuperContext(m, n)
        phase = -(ctx.x_squared()) - 1
        got = intg.domain_integral(ctx, phase, opts=opts).value
        want = special.superball_volume(m, n, 1.0)
        tol = 1e-10 if want == 0.0 else 1e-8
        checks.append((f"ball volume ({m},{n})", _close(got, want, tol),
                       f"{got!r} vs {want!r}"))
    ctx = SuperContext(3, 1)
    got = intg.surface_integral(ctx, -(ctx.x_squared()) - 1, opts=opts).value
    want = special.supersphere_area(3, 1, 1.0)
    checks.append(("sphere area (3,1)", _close(got, want, 1e-8),
                   f"{got!r} vs {want!r}"))
    return checks


def _suite_pizzetti():
    ctx = SuperContext(3, 1)
    P = (parse_superfunction(ctx, "x1^2*x3 + q1*q2*x2 + x2^4"))
    engine = intg.supersphere_integral(ctx, P).value
    series = special.pizzetti_sphere_integral(P)
    ok = abs(engine - series) <= 1e-7 * (1.0 + abs(series))
    return [("pizzetti (3,1)", ok, f"{engine!r} vs {series!r}")]


def _suite_shapes():
    checks = []
    opts = intg.Options()
    ctx = SuperContext(3, 1)
    para = -(ctx.hat_squared()) - ctx.coordinate(3)
    got = intg.domain_integral(ctx, para, constraints=(
        ex.add(ex.Const(1.0), ex.neg(ex.var(3))),), opts=opts).value
    want = special.paraboloid_volume(3, 1, 1.0)
    checks.append(("paraboloid volume (3,1)", _close(got, want, 1e-6),
                   f"{got!r} vs {want!r}"))
    hyp = -(ctx.hat_squared()) - ctx.coordinate(3) ** 2 - 1
    cons = (ex.add(ex.Const(1.0), ex.neg(ex.var(3))),
            ex.add(ex.Const(1.0), ex.var(3)))
    got = intg.domain_integral(ctx, hyp, constraints=cons, opts=opts).value
    want = special.hyperboloid_volume(3, 1, 1.0)
    checks.append(("hyperboloid volume (3,1)", _close(got, want, 1e-5),
                   f"{got!r} vs {want!r}"))
    return checks


def _suite_stokes():
    ctx = SuperContext(2, 1)
    phase = -(ctx.x_squared()) - 1
    F = parse_superfunction(ctx, "x1 + q1*q2")
    G = parse_superfunction(ctx, "x2^2 + x1*q1*q2")
    opts = intg.Options(box=1.25)
    lhs, rhs = gk.stokes_sides(ctx, phase, F, G, opts, volume_backend="grid")
    words = set(lhs) | set(rhs)
    dev = max(abs(lhs.get(w, 0.0) - rhs.get(w, 0.0)) for w in words)
    return [("stokes (2,1)", dev <= 1e-4, f"max dev {dev:.2e}")]


def _suite_cp():
    ctx = SuperContext(2, 0)
    phase = -(ctx.x_squared()) - 1
    G = parse_superfunction(ctx, "1 + x1*x2")
    checks = []
    for y, interior in [((0.3, -0.2), True), ((1.7, 0.4), False)]:
        got = gk.cauchy_pompeiu(ctx, phase, G, y, intg.Options())
        want = gk.reproduction_target(ctx, G, y) if interior else {}
        words = set(got) | set(want)
        dev = max(abs(got.get(w, 0.0) - want.get(w, 0.0)) for w in words)
        scale = 1.0 + max((abs(v) for v in want.values()), default=0.0)
        where = "interior" if interior else "exterior"
        checks.append((f"reproduction {where}", dev <= 1e-3 * scale,
                       f"max dev {dev:.2e}"))
    return checks


_SUITES = {
    "gamma": _suite_gamma,
    "special": _suite_special,
    "jets": _suite_jets,
    "ball": _suite_ball,
    "pizzetti": _suite_pizzetti,
    "shapes": _suite_shapes,
    "stokes": _suite_stokes,
    "cauchy-pompeiu": _suite_cp,
}

_QUICK = ("gamma", "special", "jets", "ball", "pizzetti")


def _run_verify(args):
    if args.suite == "all":
        names = list(_SUITES)
    elif args.suite == "quick":
        names = list(_QUICK)
    elif args.suite in _SUITES:
        names = [args.suite]
    else:
        raise SpecError(f"unknown suite {args.suite!r}; "
                        f"choose from {', '.join(_SUITES)} or all/quick")
    checks = []
    failures = 0
    for name in names:
        for label, ok, detail in _SUITES[name]():
            checks.append({"suite": name, "check": label, "ok": bool(ok),
                           "detail": detail})
            if not ok:
                failures += 1
            print(f"[{'PASS' if ok else 'FAIL'}] {name}: {label} ({detail})")
    report = {"schema": SCHEMA, "command": "verify", "suites": names,
              "checks": checks, "failures": failures}
    return report, (0 if failures == 0 else 2)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _emit(report: dict, args) -> None:
    if getattr(args, "pretty", False):
        width = max(len(k) for k in report)
        for key, val in report.items():
            if isinstance(val, dict):
                print(f"{key:<{width}} :")
                for k2, v2 in val.items():
                    print(f"  {k2}: {v2}")
            else:
                print(f"{key:<{width}} : {val}")
        return
    if getattr(args, "format", "json") == "csv":
        flat = {k: (json.dumps(v) if isinstance(v, (dict, list)) else v)
                for k, v in report.items()}
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(flat))
        writer.writeheader()
        writer.writerow(flat)
        sys.stdout.write(buf.getvalue())
        return
    print(json.dumps(report, sort_keys=False))


_RUNNERS = {
    "volume": _run_volume,
    "surface": _run_surface,
    "pizzetti": _run_pizzetti,
    "stokes": _run_stokes,
    "cauchy-pompeiu": _run_cauchy_pompeiu,
    "catalog": _run_catalog,
    "verify": _run_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _merge_problem(args)
        report, code = _RUNNERS[args.command](args)
    except (ValueError, ArithmeticError) as exc:
        print(f"superint: {exc}", file=sys.stderr)
        return 3
    except intg.IntegrationError as exc:
        print(f"superint: integration failed: {exc}", file=sys.stderr)
        return 3
    _emit(report, args)
    return code


if __name__ == "__main__":
    sys.exit(main())
