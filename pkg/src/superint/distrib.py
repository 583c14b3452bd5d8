"""Distributions with superfunction arguments.

A delta or Heaviside of an even superfunction g = g0 + s (body g0, nilpotent
soul s) expands into finitely many classical distributions of the body:

    delta^(k)(g) = sum_{j=0}^n  s^j / j!  * delta^(k+j)(g0)
    H(g)         = H(g0) + sum_{j=1}^n  s^j / j!  * delta^(j-1)(g0)

`DistributionExpansion` stores such objects relative to a single bosonic
phase: a smooth part, a Heaviside part, and delta parts by derivative
order, each with a mixed Clifford element as coefficient.  Products with
smooth elements, bosonic/fermionic derivatives, Dirac operators, and the
reduction of phase powers against delta derivatives are implemented here;
turning the result into numbers is the integration layer's job.
"""

from __future__ import annotations

import math
from fractions import Fraction

from . import expr as ex
from .clifford import MixedCliffordElement, dirac_left, dirac_right, scalar_word
from .superfun import SuperContext, SuperFunction


class DistributionError(ValueError):
    pass


def _as_mce(ctx, c) -> MixedCliffordElement:
    if isinstance(c, MixedCliffordElement):
        return c
    if isinstance(c, SuperFunction):
        return MixedCliffordElement.from_superfunction(ctx, c)
    if isinstance(c, ex.Expr):
        return MixedCliffordElement.from_superfunction(ctx, ctx.scalar(c))
    return MixedCliffordElement.from_superfunction(ctx, ctx.scalar(c))


class DistributionExpansion:
    """smooth + heavi * H(phase0) + sum_j delta[j] * delta^(j)(phase0)."""

    __slots__ = ("ctx", "phase0", "smooth", "heavi", "delta")

    def __init__(self, ctx: SuperContext, phase0, smooth=None, heavi=None, delta=None):
        self.ctx = ctx
        self.phase0 = phase0  # Expr or None when purely smooth
        zero = MixedCliffordElement.zero(ctx)
        self.smooth = _as_mce(ctx, smooth) if smooth is not None else zero
        self.heavi = _as_mce(ctx, heavi) if heavi is not None else zero
        self.delta = {}
        for j, c in (delta or {}).items():
            c = _as_mce(ctx, c)
            if not c.is_zero():
                self.delta[j] = c
        if self.phase0 is None and (not self.heavi.is_zero() or self.delta):
            raise DistributionError("distribution parts need a phase")

    # -- constructors ----------------------------------------------------------

    @classmethod
    def from_smooth(cls, ctx, c) -> "DistributionExpansion":
        return cls(ctx, None, smooth=c)

    def is_smooth(self) -> bool:
        return self.heavi.is_zero() and not self.delta

    def has_distribution(self) -> bool:
        return not self.is_smooth()

    def delta_orders(self):
        return sorted(self.delta)

    # -- algebra -----------------------------------------------------------------

    def _merged_phase(self, other):
        if self.phase0 is None:
            return other.phase0
        if other.phase0 is None:
            return self.phase0
        if self.phase0 == other.phase0 or ex.exprs_equal(self.phase0, other.phase0):
            return self.phase0
        raise DistributionError("cannot combine expansions with different phases")

    def __add__(self, other):
        if not isinstance(other, DistributionExpansion):
            other = DistributionExpansion.from_smooth(self.ctx, other)
        phase = self._merged_phase(other)
        delta = dict(self.delta)
        for j, c in other.delta.items():
            delta[j] = delta[j] + c if j in delta else c
        return DistributionExpansion(self.ctx, phase,
                                     smooth=self.smooth + other.smooth,
                                     heavi=self.heavi + other.heavi,
                                     delta=delta)

    __radd__ = __add__

    def __neg__(self):
        return DistributionExpansion(self.ctx, self.phase0,
                                     smooth=-self.smooth, heavi=-self.heavi,
                                     delta={j: -c for j, c in self.delta.items()})

    def __sub__(self, other):
        if not isinstance(other, DistributionExpansion):
            other = DistributionExpansion.from_smooth(self.ctx, other)
        return self + (-other)

    def _map(self, fn) -> "DistributionExpansion":
        return DistributionExpansion(self.ctx, self.phase0,
                                     smooth=fn(self.smooth), heavi=fn(self.heavi),
                                     delta={j: fn(c) for j, c in self.delta.items()})

    def mul_left(self, c) -> "DistributionExpansion":
        """c * self, with c smooth (superfunction / Clifford element)."""
        c = _as_mce(self.ctx, c)
        return self._map(lambda f: c * f)

    def mul_right(self, c) -> "DistributionExpansion":
        """self * c; the distribution factors are even scalars, so they
        slide past c and only the coefficients multiply."""
        c = _as_mce(self.ctx, c)
        return self._map(lambda f: f * c)

    def scale(self, c) -> "DistributionExpansion":
        return self._map(lambda f: f.scale(c))

    def __mul__(self, other):
        if isinstance(other, DistributionExpansion):
            if other.is_smooth():
                return self.mul_right(other.smooth)
            if self.is_smooth():
                return other.mul_left(self.smooth)
            raise DistributionError(
                "product of two singular distributions is not defined here; "
                "multiply through smooth factors instead")
        return self.mul_right(other)

    def __rmul__(self, other):
        return self.mul_left(other)

    # -- derivatives ----------------------------------------------------------------

    def bosonic_diff(self, k: int) -> "DistributionExpansion":
        """d/dx_k with the chain rule in the bosonic phase."""
        out = self._map(lambda f: _mce_bosonic_diff(f, k))
        if self.phase0 is None:
            return out
        dg = ex.diff(self.phase0, k)
        if ex.is_const(dg, 0):
            return out
        delta = dict(out.delta)
        if not self.heavi.is_zero():
            t = self.heavi.scale(dg)
            delta[0] = delta[0] + t if 0 in delta else t
        for j, c in self.delta.items():
            t = c.scale(dg)
            delta[j + 1] = delta[j + 1] + t if j + 1 in delta else t
        return DistributionExpansion(self.ctx, self.phase0, smooth=out.smooth,
                                     heavi=out.heavi, delta=delta)

    def fermionic_diff(self, j: int) -> "DistributionExpansion":
        """Left derivative in q_j; the classical factors are bosonic, so it
        acts on coefficients only."""
        return self._map(lambda f: _mce_fermionic_diff(f, j))

    def dirac_left(self) -> "DistributionExpansion":
        out = self._map(lambda f: dirac_left(self.ctx, f))
        if self.phase0 is None:
            return out
        dg = dirac_left(self.ctx, self.ctx.scalar(self.phase0))
        if dg.is_zero():
            return out
        delta = dict(out.delta)
        if not self.heavi.is_zero():
            t = dg * self.heavi
            delta[0] = delta[0] + t if 0 in delta else t
        for j, c in self.delta.items():
            t = dg * c
            delta[j + 1] = delta[j + 1] + t if j + 1 in delta else t
        return DistributionExpansion(self.ctx, self.phase0, smooth=out.smooth,
                                     heavi=out.heavi, delta=delta)

    def dirac_right(self) -> "DistributionExpansion":
        out = self._map(lambda f: dirac_right(self.ctx, f))
        if self.phase0 is None:
            return out
        dg = dirac_right(self.ctx, self.ctx.scalar(self.phase0))
        if dg.is_zero():
            return out
        delta = dict(out.delta)
        if not self.heavi.is_zero():
            t = self.heavi * dg
            delta[0] = delta[0] + t if 0 in delta else t
        for j, c in self.delta.items():
            t = c * dg
            delta[j + 1] = delta[j + 1] + t if j + 1 in delta else t
        return DistributionExpansion(self.ctx, self.phase0, smooth=out.smooth,
                                     heavi=out.heavi, delta=delta)

    # -- phase manipulation ------------------------------------------------------------

    def negate_phase(self) -> "DistributionExpansion":
        """Rewrite relative to -phase0 using the classical reflection rules
        delta^(j)(-u) = (-1)^j delta^(j)(u) and H(-u) = 1 - H(u)."""
        if self.phase0 is None:
            return self
        delta = {j: (c if j % 2 == 0 else -c) for j, c in self.delta.items()}
        return DistributionExpansion(self.ctx, ex.neg(self.phase0),
                                     smooth=self.smooth + self.heavi,
                                     heavi=-self.heavi, delta=delta)

    def rescaled(self, h0: ex.Expr, g0: ex.Expr) -> "DistributionExpansion":
        """Rewrite relative to the factor g0 of phase0 = h0 * g0, with h0 > 0
        near the zero set: delta^(j)(h0 g0) = delta^(j)(g0) / h0^(j+1) and
        H(h0 g0) = H(g0)."""
        if self.phase0 is None:
            return self
        if not ex.exprs_equal(self.phase0, ex.mul(h0, g0)):
            raise DistributionError("phase does not factor as h0 * g0")
        delta = {}
        for j, c in self.delta.items():
            delta[j] = c.scale(ex.power(h0, -(j + 1)))
        return DistributionExpansion(self.ctx, g0, smooth=self.smooth,
                                     heavi=self.heavi, delta=delta)

    def reduce_phase_powers(self) -> "DistributionExpansion":
        """Push powers of the bosonic phase through the delta derivatives:
        g0 * delta^(j)(g0) = -j delta^(j-1)(g0), g0 * delta(g0) = 0.

        Requires the phase and the delta coefficients to be polynomial; the
        result's delta coefficients are reduced modulo the phase, making it
        a canonical form for exact identity checking.
        """
        if self.phase0 is None or not self.delta:
            return self
        m = self.ctx.m
        g0poly = ex.as_polynomial(self.phase0, m)
        if not g0poly:
            raise DistributionError("phase is not a nonzero polynomial")
        acc = {}  # order -> {word -> {mask -> poly}}

        def _push(order, word, mask, poly):
            while True:
                q, r = ex.poly_divmod(poly, g0poly)
                if r:
                    dest = acc.setdefault(order, {}).setdefault(word, {})
                    dest[mask] = _poly_add(dest.get(mask), r)
                if not q or order == 0:
                    return
                poly = {t: -order * c for t, c in q.items()}
                order -= 1

        for j, c in self.delta.items():
            for word, f in c.terms.items():
                for mask, e in f.comps.items():
                    poly = ex.as_polynomial(e, m)
                    if poly is None:
                        raise DistributionError(
                            f"coefficient at order {j} is not polynomial: {e!r}")
                    _push(j, word, mask, poly)
        delta = {}
        for order, words in acc.items():
            terms = {}
            for word, comps in words.items():
                sf = SuperFunction(self.ctx,
                                   {mask: ex.poly_to_expr(p) for mask, p in comps.items()})
                if not sf.is_zero():
                    terms[word] = sf
            mce = MixedCliffordElement(self.ctx, terms)
            if not mce.is_zero():
                delta[order] = mce
        return DistributionExpansion(self.ctx, self.phase0, smooth=self.smooth,
                                     heavi=self.heavi, delta=delta)

    # -- comparison ---------------------------------------------------------------------

    def equals(self, other, tol: float = 1e-12) -> bool:
        if not isinstance(other, DistributionExpansion):
            other = DistributionExpansion.from_smooth(self.ctx, other)
        try:
            self._merged_phase(other)
        except DistributionError:
            return False
        if not self.smooth.equals(other.smooth, tol):
            return False
        if not self.heavi.equals(other.heavi, tol):
            return False
        orders = set(self.delta) | set(other.delta)
        zero = MixedCliffordElement.zero(self.ctx)
        for j in orders:
            if not self.delta.get(j, zero).equals(other.delta.get(j, zero), tol):
                return False
        return True

    def __repr__(self):
        parts = []
        if not self.smooth.is_zero():
            parts.append(f"[{self.smooth!r}]")
        if not self.heavi.is_zero():
            parts.append(f"[{self.heavi!r}]*H({self.phase0!r})")
        for j in sorted(self.delta):
            parts.append(f"[{self.delta[j]!r}]*delta^({j})({self.phase0!r})")
        return " + ".join(parts) if parts else "0"


def _poly_add(a, b):
    if a is None:
        return dict(b)
    out = dict(a)
    for t, c in b.items():
        out[t] = out.get(t, Fraction(0)) + c
        if out[t] == 0:
            del out[t]
    return out


def _mce_bosonic_diff(f: MixedCliffordElement, k: int) -> MixedCliffordElement:
    return MixedCliffordElement(f.ctx, {w: c.bosonic_diff(k) for w, c in f.terms.items()})


def _mce_fermionic_diff(f: MixedCliffordElement, j: int) -> MixedCliffordElement:
    return MixedCliffordElement(f.ctx, {w: c.fermionic_diff(j) for w, c in f.terms.items()})


# ---------------------------------------------------------------------------
# expansions of super phases
# ---------------------------------------------------------------------------

def _soul_terms(g: SuperFunction):
    """[(j, soul(g)^j / j!)] for j = 0..n (stops when the power vanishes)."""
    if not g.is_even():
        raise DistributionError("distribution phases must be even superfunctions")
    out = []
    for j, p in enumerate(g._soul_powers()):
        if j >= 2:
            p = p.scale(Fraction(1, math.factorial(j)))
        out.append((j, p))
    return out


def expand_delta(ctx: SuperContext, g: SuperFunction, order: int = 0) -> DistributionExpansion:
    """delta^(order)(g) as an expansion in delta^(order+j)(body g)."""
    delta = {}
    for j, c in _soul_terms(g):
        delta[order + j] = MixedCliffordElement.from_superfunction(ctx, c)
    return DistributionExpansion(ctx, g.body, delta=delta)


def expand_heaviside(ctx: SuperContext, g: SuperFunction) -> DistributionExpansion:
    """H(g) as H(body g) plus delta corrections from the soul."""
    delta = {}
    heavi = None
    for j, c in _soul_terms(g):
        if j == 0:
            heavi = c
        else:
            delta[j - 1] = MixedCliffordElement.from_superfunction(ctx, c)
    if heavi is None or not heavi.equals(ctx.one()):  # pragma: no cover
        raise DistributionError("soul expansion must start at 1")
    return DistributionExpansion(ctx, g.body, heavi=ctx.one(), delta=delta)
