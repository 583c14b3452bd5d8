"""Fundamental solution of the super Dirac operator and the identities it
generates (reproduction of interior values, integration by parts).

The kernel is assembled from the chain phi_1, phi_2, ... of fundamental
solutions of the iterated bosonic Dirac operator -- phi_{j+1} is mapped to
phi_j by the vector derivative -- tensored with powers of the fermionic part
of the supervector.  All radial profiles stay in closed form as finite sums
c * r^a * log(r)^L, so volume integrals of kernel times polynomial reduce to
exact one-dimensional antiderivatives along rays from the source point; only
the angular average is numerical.
"""

from __future__ import annotations

import math
from dataclasses import replace
from fractions import Fraction

import numpy as np

from . import expr as ex
from . import integrate as intg
from . import quadrature as quad
from .clifford import MixedCliffordElement, _as_mce, dirac_left, dirac_right
from .distrib import DistributionExpansion, expand_delta, expand_heaviside
from .jets import JetSeries, evaluate_jet
from .superfun import SuperContext

__all__ = [
    "dirac_solution_chain",
    "fundamental_solution",
    "cauchy_pompeiu",
    "reproduction_target",
    "stokes_sides",
]


# ---------------------------------------------------------------------------
# radial profiles: dict (a, L) -> c, meaning sum of c * r^a * log(r)^L
# ---------------------------------------------------------------------------

def _vector_to_scalar(prof: dict) -> dict:
    """Profile of the scalar solution g with g'(r) = r * f(r).

    This is the step from an odd chain member x_vec * f(r) to the next
    (scalar) member: the vector derivative of g(r) is x_vec * g'(r)/r.
    """
    out = {}
    for (a, L), c in prof.items():
        q = a + 1  # antidifferentiate c * r^q * log^L
        if q == -1:
            key = (0, L + 1)
            out[key] = out.get(key, 0.0) + c / (L + 1)
            continue
        cur = c
        for i in range(L, -1, -1):
            key = (q + 1, i)
            out[key] = out.get(key, 0.0) + cur / (q + 1)
            cur = -cur * i / (q + 1)
    return {k: v for k, v in out.items() if v != 0.0}


def _scalar_to_vector(prof: dict, m: int) -> dict:
    """Profile g of a vector solution x_vec * g(r) with -(m g + r g') = f.

    The left side is the vector derivative of x_vec * g(r); the resonant
    exponent a = -m needs an extra log factor.
    """
    out = {}
    for (a, L), c in prof.items():
        d = m + a
        if d == 0:
            key = (a, L + 1)
            out[key] = out.get(key, 0.0) - c / (L + 1)
            continue
        cur = -c / d
        for i in range(L, -1, -1):
            key = (a, i)
            out[key] = out.get(key, 0.0) + cur
            cur = -cur * i / d
    return {k: v for k, v in out.items() if v != 0.0}


def dirac_solution_chain(m: int, count: int) -> list:
    """Fundamental solutions of the iterated bosonic Dirac operator.

    Entry j (0-based) describes the solution killed by j+2 applications of
    the vector derivative and mapped to entry j-1 by one application.  Odd
    entries (j even) are vector valued, x_vec * profile(r); even entries are
    scalar, profile(r).  Profiles map (a, L) -> c for c * r^a * log(r)^L.
    """
    if count < 1:
        raise ValueError("need at least one chain member")
    prof = {(-m, 0): -1.0 / quad.surface_area(m)}
    chain = [("vector", dict(prof))]
    for j in range(2, count + 1):
        if j % 2 == 0:
            prof = _vector_to_scalar(prof)
            chain.append(("scalar", dict(prof)))
        else:
            prof = _scalar_to_vector(prof, m)
            chain.append(("vector", dict(prof)))
    return chain


def _radius2_expr(m: int, y) -> ex.Expr:
    terms = []
    for k in range(m):
        base = ex.var(k + 1)
        if y is not None and y[k]:
            base = ex.add(base, ex.Const(-float(y[k])))
        terms.append(ex.power(base, 2))
    return ex.add(*terms)


def _profile_expr(prof: dict, r2: ex.Expr) -> ex.Expr:
    """Closed-form expression of a radial profile in terms of r^2.

    Using (r^2)^(a/2) and log(r^2)/2 keeps the tree free of nested roots.
    """
    terms = []
    for (a, L), c in sorted(prof.items()):
        factors = [ex.Const(c * 0.5 ** L)]
        if a:
            factors.append(ex.power(r2, Fraction(a, 2)))
        if L:
            factors.append(ex.power(ex.call("log", r2), L))
        terms.append(ex.mul(*factors))
    return ex.add(*terms)


# ---------------------------------------------------------------------------
# the kernel
# ---------------------------------------------------------------------------

def _kernel_pieces(ctx: SuperContext) -> list:
    """Kernel decomposed by Clifford word.

    Returns tuples (word, vector_index, grassmann_factor, profile): the
    coefficient of `word` is profile(r) times the Grassmann superfunction,
    times (x_i - y_i) when vector_index = i > 0.
    """
    m, n = ctx.m, ctx.n
    chain = dirac_solution_chain(m, 2 * n + 1)
    pn = math.pi ** n
    fs = ctx.fermionic_square()
    pieces = []
    for k in range(n):
        pref = pn * 2.0 ** (2 * k + 1) * math.factorial(k) / math.factorial(n - k - 1)
        kind, prof = chain[2 * k + 1]
        if kind != "scalar":  # pragma: no cover - chain alternates by construction
            raise intg.IntegrationError("chain parity mismatch")
        prof = {al: pref * c for al, c in prof.items()}
        ferm = fs ** (n - k - 1)
        for j in range(1, 2 * n + 1):
            epows = [0] * (2 * n)
            epows[j - 1] = 1
            pieces.append(((0, tuple(epows)), 0, ctx.generator(j) * ferm, prof))
    for k in range(n + 1):
        pref = pn * 2.0 ** (2 * k) * math.factorial(k) / math.factorial(n - k)
        kind, prof = chain[2 * k]
        if kind != "vector":  # pragma: no cover
            raise intg.IntegrationError("chain parity mismatch")
        prof = {al: -pref * c for al, c in prof.items()}
        ferm = fs ** (n - k)
        for i in range(1, m + 1):
            pieces.append(((1 << (i - 1), (0,) * (2 * n)), i, ferm, prof))
    return pieces


def fundamental_solution(ctx: SuperContext, y=None) -> MixedCliffordElement:
    """The kernel K(x - y) reproducing interior values of monogenic data:
    super Dirac applied to it (from either side) vanishes away from y, and
    its boundary pairing recovers G(y) -- see cauchy_pompeiu.  y is a bosonic
    point (defaults to the origin)."""
    if y is not None:
        y = np.asarray(y, dtype=float)
        if y.shape != (ctx.m,):
            raise ValueError("y must be a bosonic point of length m")
    r2 = _radius2_expr(ctx.m, y)
    terms = {}
    for word, vec, sf, prof in _kernel_pieces(ctx):
        e = _profile_expr(prof, r2)
        if vec:
            xi = ex.var(vec)
            if y is not None and y[vec - 1]:
                xi = ex.add(xi, ex.Const(-float(y[vec - 1])))
            e = ex.mul(xi, e)
        f = sf.scale(e)
        terms[word] = terms[word] + f if word in terms else f
    return MixedCliffordElement(ctx, terms)


def _kernel_placeholders(ctx: SuperContext, y):
    """Kernel with each radial factor replaced by a placeholder variable.

    Returns (atoms, mce): atoms[i] = (a, L) and the i-th factor appears as
    the variable with index m + 2 + i (m + 1 is the composition scratch
    slot, which must stay untouched).  Weights built from this element stay
    polynomial, so the radial dependence can be split off exactly.
    """
    pieces = _kernel_pieces(ctx)
    atoms = sorted({al for _, _, _, prof in pieces for al in prof})
    index = {al: i for i, al in enumerate(atoms)}
    base = ctx.m + 1
    terms = {}
    for word, vec, sf, prof in pieces:
        e = ex.add(*[ex.mul(ex.Const(c), ex.var(base + 1 + index[al]))
                     for al, c in sorted(prof.items())])
        if vec:
            xi = ex.var(vec)
            if y[vec - 1]:
                xi = ex.add(xi, ex.Const(-float(y[vec - 1])))
            e = ex.mul(xi, e)
        f = sf.scale(e)
        terms[word] = terms[word] + f if word in terms else f
    return atoms, MixedCliffordElement(ctx, terms)


def _split_kernel_weight(weight: ex.Expr, m: int, natoms: int) -> dict:
    """Split a Berezin-reduced weight into {atom_index: polynomial in x}.

    The weight must be linear in the placeholder variables -- the kernel
    enters every product exactly once.
    """
    base = m + 1
    poly = ex.as_polynomial(weight, base + natoms)
    if poly is None:
        raise intg.IntegrationError(
            "volume weight is not polynomial in the kernel placeholders")
    groups = {}
    for expo, c in poly.items():
        if expo[m]:  # pragma: no cover - nothing composes these weights
            raise intg.IntegrationError("scratch variable leaked into a weight")
        tail = expo[base:]
        marked = [i for i, p in enumerate(tail) if p]
        if len(marked) != 1 or tail[marked[0]] != 1:
            raise intg.IntegrationError("weight is not linear in the kernel")
        g = groups.setdefault(marked[0], {})
        key = expo[:m]
        g[key] = g.get(key, 0) + c
    return groups


# ---------------------------------------------------------------------------
# polar volume integrals: polynomial times r^a log^L about the source point
# ---------------------------------------------------------------------------

def _power_log_primitive(q, L: int, t):
    """Antiderivative of t^q log(t)^L, normalized to 0 at t = 0 when q > -1.

    Entries with t = 0 return 0; for q <= -1 they are placeholders that the
    caller must mask out.
    """
    t = np.asarray(t, dtype=float)
    pos = t > 0.0
    lt = np.log(np.where(pos, t, 1.0))
    if q == -1:
        return lt ** (L + 1) / (L + 1)
    tp = np.where(pos, t, 1.0) ** (q + 1) * np.where(pos, 1.0, 0.0)
    acc = np.zeros_like(t)
    cur = 1.0 / (q + 1)
    for i in range(L, -1, -1):
        acc = acc + cur * lt ** i
        cur = -cur * i / (q + 1)
    return tp * acc


def _ray_positive_intervals(phase0: ex.Expr, y, pts, box: float,
                            max_roots: int = 6, nscan: int = 800) -> list:
    """Per angular node, the t-intervals in (0, box) with phase0(y+t*w) > 0.

    Returns branches (mask, lo, hi) of aligned arrays over the nodes; a node
    participates in a branch only where mask holds.
    """
    m = pts.shape[1]
    N = pts.shape[0]

    def feval(t):
        env = {k + 1: y[k] + t * pts[:, k] for k in range(m)}
        vals = np.asarray(ex.evaluate(phase0, env), dtype=float)
        return np.broadcast_to(vals, t.shape)

    T = np.linspace(1e-9 * box, box, nscan)
    env = {k + 1: y[k] + T[:, None] * pts[:, k] for k in range(m)}
    V = np.asarray(ex.evaluate(phase0, env), dtype=float)
    V = np.broadcast_to(V, (nscan, N))
    sgn = np.where(V >= 0.0, 1.0, -1.0)
    flips = sgn[:-1] * sgn[1:] < 0.0
    order = np.cumsum(flips, axis=0)
    total_flips = order[-1] if len(order) else np.zeros(N)
    if np.any(total_flips > max_roots):
        raise intg.IntegrationError("too many boundary crossings along a ray")

    cuts = [np.zeros(N)]
    cols = np.arange(N)
    for b in range(1, max_roots + 1):
        sel = flips & (order == b)
        has = sel.any(axis=0)
        if not has.any():
            break
        idx = np.where(has, sel.argmax(axis=0), 0)
        lo = T[idx]
        hi = T[idx + 1]
        flo = V[idx, cols]
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            fm = feval(mid)
            left = flo * fm <= 0.0
            hi = np.where(left, mid, hi)
            lo = np.where(left, lo, mid)
            flo = np.where(left, flo, fm)
        cuts.append(np.where(has, 0.5 * (lo + hi), box))
    cuts.append(np.full(N, box))

    branches = []
    for klo in range(len(cuts) - 1):
        lo_c, hi_c = cuts[klo], cuts[klo + 1]
        wide = hi_c > lo_c + 1e-12
        if not wide.any():
            continue
        mid = np.where(wide, 0.5 * (lo_c + hi_c), 0.5 * box)
        mask = wide & (feval(mid) > 0.0)
        if not mask.any():
            continue
        if np.any(mask & (hi_c >= box * (1.0 - 1e-9))):
            raise intg.IntegrationError(
                "region is not contained in the bounding box")
        branches.append((mask, lo_c, hi_c))
    return branches


def _poly_kernel_volume(m: int, phase0: ex.Expr, y, groups: dict,
                        atoms: list, opts: intg.Options) -> float:
    """Integral over {phase0 > 0} of sum_i poly_i(x) |x-y|^(a_i) log^(L_i)|x-y|.

    Polar coordinates about y: the polynomial becomes a jet in t along each
    ray, every radial factor is integrated in closed form, and only the
    angular average is numerical.  Contributions at the critical exponent
    (t^-1 at an interior source) must carry an analytically vanishing
    coefficient, which is checked rather than trusted.
    """
    if not groups:
        return 0.0
    pts, wts = quad.sphere_nodes(m, opts.angular)
    branches = _ray_positive_intervals(phase0, y, pts, opts.box)
    if not branches:
        return 0.0
    total = 0.0
    for idx, poly in groups.items():
        if not poly:
            continue
        a, L = atoms[idx]
        deg = max(sum(e) for e in poly)
        order = max(deg, 1)
        t = JetSeries.variable(0.0, order)
        env = {k + 1: y[k] + t * pts[:, k] for k in range(m)}
        jet = evaluate_jet(ex.poly_to_expr(poly), env, order)
        coeffs = [np.broadcast_to(np.asarray(c, dtype=float), (len(wts),))
                  for c in jet.coeffs]
        scale = max(float(np.max(np.abs(c))) for c in coeffs)
        for d, qd in enumerate(coeffs):
            if not np.any(qd):
                continue
            q = d + a + m - 1
            if q <= -1:
                if float(np.max(np.abs(qd))) > 1e-8 * max(scale, 1.0):
                    raise intg.IntegrationError(
                        "kernel-weight product too singular at the source")
                continue  # coefficient vanishes analytically; drop roundoff
            for mask, lo, hi in branches:
                part = _power_log_primitive(q, L, hi) - _power_log_primitive(q, L, lo)
                total += float(np.dot(wts, np.where(mask, qd * part, 0.0)))
    return total


# ---------------------------------------------------------------------------
# the two integral identities
# ---------------------------------------------------------------------------

def cauchy_pompeiu(ctx: SuperContext, phase, G, y, opts: intg.Options = None) -> dict:
    """Reproduction identity over the super-domain {phase <= 0}: by Clifford
    word, the boundary pairing of the kernel with G minus the volume term
    against the super Dirac derivative of G.

    For a bosonic source y interior to the body region the result equals the
    body values of G's words at y; for an exterior y it vanishes.
    """
    opts = opts or intg.Options()
    y = np.asarray(y, dtype=float)
    if y.shape != (ctx.m,):
        raise ValueError("y must be a bosonic point of length m")
    Gm = _as_mce(ctx, G)
    kern = fundamental_solution(ctx, y)

    de_b = expand_delta(ctx, phase).mul_right(dirac_left(ctx, phase) * Gm)
    de_b = de_b.mul_left(kern)
    out = dict(intg.integrate_expansion(de_b, (), opts).by_word)

    dG = dirac_left(ctx, Gm)
    if dG.is_zero():
        return out
    devol = expand_heaviside(ctx, -phase).mul_right(dG)

    # soul corrections of the Heaviside are delta layers away from the
    # source: the standard backends apply
    real = devol.mul_left(kern)
    if real.delta:
        res_d = intg.integrate_expansion(
            DistributionExpansion(ctx, real.phase0, delta=real.delta), (), opts)
        for w, v in res_d.by_word.items():
            out[w] = out.get(w, 0.0) - v

    # the Heaviside part meets the kernel singularity at y: split the radial
    # factors off through placeholders and integrate them exactly along rays
    atoms, ksym = _kernel_placeholders(ctx, y)
    tasks = intg.berezin_reduce(
        DistributionExpansion(ctx, devol.phase0, heavi=ksym * devol.heavi))
    for t in tasks:
        groups = _split_kernel_weight(t.weight, ctx.m, len(atoms))
        val = _poly_kernel_volume(ctx.m, t.phase0, y, groups, atoms, opts)
        out[t.word] = out.get(t.word, 0.0) - val
    return out


def reproduction_target(ctx: SuperContext, G, y) -> dict:
    """Body values of G's Clifford words at the bosonic point y -- what the
    reproduction identity yields for an interior source."""
    Gm = _as_mce(ctx, G)
    env = {k + 1: float(y[k]) for k in range(ctx.m)}
    return {w: float(ex.evaluate(sf.body, env)) for w, sf in Gm.terms.items()}


def stokes_sides(ctx: SuperContext, phase, F, G, opts: intg.Options = None,
                 volume_backend: str = None) -> tuple:
    """Both sides of the integration-by-parts identity on {phase <= 0}.

    Left: volume integral of (F right-Dirac) G + F (left-Dirac G).  Right:
    boundary pairing of F with G through the Dirac image of the phase.
    Returns the pair of by-word dictionaries.  volume_backend forces the
    backend of the Heaviside part only; soul-correction layers always use
    automatic selection.
    """
    opts = opts or intg.Options()
    Fm = _as_mce(ctx, F)
    Gm = _as_mce(ctx, G)
    integrand = dirac_right(ctx, Fm) * Gm + Fm * dirac_left(ctx, Gm)
    de_l = expand_heaviside(ctx, -phase).mul_right(integrand)
    h_opts = opts if volume_backend is None else replace(opts, backend=volume_backend)
    lhs = dict(intg.integrate_expansion(
        DistributionExpansion(ctx, de_l.phase0, heavi=de_l.heavi), (), h_opts).by_word)
    if de_l.delta:
        res_d = intg.integrate_expansion(
            DistributionExpansion(ctx, de_l.phase0, delta=de_l.delta), (), opts)
        for w, v in res_d.by_word.items():
            lhs[w] = lhs.get(w, 0.0) + v

    de_r = expand_delta(ctx, phase).mul_right(dirac_left(ctx, phase) * Gm)
    de_r = de_r.mul_left(Fm)
    rhs = dict(intg.integrate_expansion(de_r, (), opts).by_word)
    return lhs, rhs
