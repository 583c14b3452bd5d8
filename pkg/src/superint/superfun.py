"""Superfunctions: Grassmann-blade expansions with symbolic coefficients.

A superfunction over the (m, n) context is a finite sum

    F = sum_A  F_A(x1..xm) * q_A

where q_A are the blades of the algebra on 2n anticommuting generators and
each coefficient F_A is a scalar expression.  Everything downstream -- phases,
delta expansions, kernels -- is built from this type.

The scratch variable x_{m+1} is reserved for analytic composition: f(a) for
an even superfunction a expands as sum_j soul(a)^j / j! * f^(j)(body(a)),
and the derivatives f^(j) are formed symbolically in the scratch variable
before the body is substituted in.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction

from . import expr as ex
from .grassmann import (GrassmannAlgebra, GrassmannElement, blade_mul,
                        blade_string, popcount)


class SuperFunctionError(ValueError):
    pass


class SuperContext:
    """Fixes the bosonic dimension m >= 1 and the number n of fermion pairs."""

    def __init__(self, m: int, n: int):
        if m < 1:
            raise SuperFunctionError("need at least one bosonic dimension")
        self.m = m
        self.n = n
        self.alg = GrassmannAlgebra(n)
        self.superdim = m - 2 * n
        self.scratch = m + 1  # reserved variable index for composition

    def __repr__(self):
        return f"SuperContext(m={self.m}, n={self.n})"

    def __eq__(self, other):
        return isinstance(other, SuperContext) and (other.m, other.n) == (self.m, self.n)

    # -- constructors --------------------------------------------------------

    def zero(self) -> "SuperFunction":
        return SuperFunction(self, {})

    def scalar(self, e) -> "SuperFunction":
        e = e if isinstance(e, ex.Expr) else ex.Const(e)
        return SuperFunction(self, {0: e})

    def one(self) -> "SuperFunction":
        return self.scalar(1)

    def coordinate(self, j: int) -> "SuperFunction":
        if not 1 <= j <= self.m:
            raise SuperFunctionError(f"coordinate index {j} out of range 1..{self.m}")
        return self.scalar(ex.var(j))

    def generator(self, j: int) -> "SuperFunction":
        if not 1 <= j <= 2 * self.n:
            raise SuperFunctionError(f"generator index {j} out of range 1..{2 * self.n}")
        return SuperFunction(self, {1 << (j - 1): ex.ONE})

    def from_blades(self, comps: dict) -> "SuperFunction":
        return SuperFunction(self, comps)

    # -- standard geometric objects -------------------------------------------

    def norm2_body(self) -> ex.Expr:
        """|x_bosonic|^2 = x1^2 + ... + xm^2."""
        return ex.add(*[ex.power(ex.var(j), 2) for j in range(1, self.m + 1)])

    def fermionic_square(self) -> "SuperFunction":
        """sum_j q_{2j-1} q_{2j}; its n-th power is n! q_1...q_{2n}."""
        comps = {}
        for j in range(self.n):
            comps[(1 << (2 * j)) | (1 << (2 * j + 1))] = ex.ONE
        return SuperFunction(self, comps)

    def x_squared(self) -> "SuperFunction":
        """The square of the supervector: -|x_bosonic|^2 + fermionic square."""
        out = {0: ex.neg(self.norm2_body())}
        for mask, e in self.fermionic_square().comps.items():
            out[mask] = e
        return SuperFunction(self, out)

    def hat_squared(self) -> "SuperFunction":
        """Supervector square with the last bosonic coordinate left out --
        the axis form used by the rotation-symmetric catalog shapes."""
        out = self.fermionic_square()
        for j in range(1, self.m):
            out = out - self.coordinate(j) ** 2
        return out

    def modulus(self) -> "SuperFunction":
        """|x| = (-x^2)^(1/2), an even superfunction with body |x_bosonic|."""
        return (-self.x_squared()).power(Fraction(1, 2))


class SuperFunction:
    __slots__ = ("ctx", "comps")

    def __init__(self, ctx: SuperContext, comps: dict):
        self.ctx = ctx
        clean = {}
        for mask, e in comps.items():
            e = e if isinstance(e, ex.Expr) else ex.Const(e)
            if not ex.is_const(e, 0):
                clean[mask] = e
        self.comps = clean

    # -- structure -------------------------------------------------------------

    def __getitem__(self, mask: int) -> ex.Expr:
        return self.comps.get(mask, ex.ZERO)

    @property
    def body(self) -> ex.Expr:
        return self.comps.get(0, ex.ZERO)

    def soul(self) -> "SuperFunction":
        return SuperFunction(self.ctx, {m: e for m, e in self.comps.items() if m})

    def is_zero(self) -> bool:
        return not self.comps

    def grades(self):
        return sorted({popcount(m) for m in self.comps})

    def is_even(self) -> bool:
        return all(popcount(m) % 2 == 0 for m in self.comps)

    def is_odd(self) -> bool:
        return all(popcount(m) % 2 == 1 for m in self.comps)

    def map_coeffs(self, fn) -> "SuperFunction":
        return SuperFunction(self.ctx, {m: fn(e) for m, e in self.comps.items()})

    def _check(self, other):
        if self.ctx != other.ctx:
            raise SuperFunctionError("superfunctions from different contexts")

    # -- algebra ----------------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, SuperFunction):
            other = self.ctx.scalar(other)
        self._check(other)
        comps = dict(self.comps)
        for m, e in other.comps.items():
            comps[m] = ex.add(comps[m], e) if m in comps else e
        return SuperFunction(self.ctx, comps)

    __radd__ = __add__

    def __neg__(self):
        return SuperFunction(self.ctx, {m: ex.neg(e) for m, e in self.comps.items()})

    def __sub__(self, other):
        if not isinstance(other, SuperFunction):
            other = self.ctx.scalar(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, SuperFunction):
            return self.scale(other)
        self._check(other)
        comps = {}
        for ma, ea in self.comps.items():
            for mb, eb in other.comps.items():
                sign, mask = blade_mul(ma, mb)
                if not sign:
                    continue
                term = ex.mul(ea, eb) if sign > 0 else ex.neg(ex.mul(ea, eb))
                comps[mask] = ex.add(comps[mask], term) if mask in comps else term
        return SuperFunction(self.ctx, comps)

    def __rmul__(self, other):
        # coefficients commute, only blades carry order
        return self.scale(other)

    def scale(self, c) -> "SuperFunction":
        e = c if isinstance(c, ex.Expr) else ex.Const(c)
        return SuperFunction(self.ctx, {m: ex.mul(e, f) for m, f in self.comps.items()})

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise SuperFunctionError("__pow__ is for nonnegative integers; see power()")
        out = self.ctx.one()
        for _ in range(k):
            out = out * self
        return out

    def star(self) -> "SuperFunction":
        """Grade involution: blade q_A picks up (-1)^|A|."""
        return SuperFunction(
            self.ctx,
            {m: (e if popcount(m) % 2 == 0 else ex.neg(e)) for m, e in self.comps.items()},
        )

    # -- derivatives --------------------------------------------------------------

    def bosonic_diff(self, j: int) -> "SuperFunction":
        return SuperFunction(self.ctx, {m: ex.diff(e, j) for m, e in self.comps.items()})

    def fermionic_diff(self, j: int) -> "SuperFunction":
        """Left derivative with respect to q_j."""
        bit = 1 << (j - 1)
        comps = {}
        for m, e in self.comps.items():
            if not (m & bit):
                continue
            sign = -1 if popcount(m & (bit - 1)) & 1 else 1
            t = e if sign > 0 else ex.neg(e)
            mask = m ^ bit
            comps[mask] = ex.add(comps[mask], t) if mask in comps else t
        return SuperFunction(self.ctx, comps)

    def fermionic_rdiff(self, j: int) -> "SuperFunction":
        """Right derivative with respect to q_j."""
        bit = 1 << (j - 1)
        comps = {}
        for m, e in self.comps.items():
            if not (m & bit):
                continue
            above = m & ~((bit << 1) - 1)
            sign = -1 if popcount(above) & 1 else 1
            t = e if sign > 0 else ex.neg(e)
            mask = m ^ bit
            comps[mask] = ex.add(comps[mask], t) if mask in comps else t
        return SuperFunction(self.ctx, comps)

    def laplacian(self) -> "SuperFunction":
        """4 sum_j d_{q_{2j-1}} d_{q_{2j}} - sum_j d^2_{x_j}."""
        out = self.ctx.zero()
        for j in range(1, self.ctx.n + 1):
            out = out + self.fermionic_diff(2 * j).fermionic_diff(2 * j - 1).scale(4)
        for j in range(1, self.ctx.m + 1):
            out = out - self.bosonic_diff(j).bosonic_diff(j)
        return out

    # -- analytic composition -------------------------------------------------------

    def _soul_powers(self):
        """[soul^0 .. soul^n]; for even arguments soul^j vanishes beyond n."""
        powers = [self.ctx.one()]
        s = self.soul()
        for _ in range(self.ctx.n):
            nxt = powers[-1] * s
            if nxt.is_zero():
                break
            powers.append(nxt)
        return powers

    def compose(self, fn: str) -> "SuperFunction":
        """f(self) for f in the supported function set; self must be even."""
        if not self.is_even():
            raise SuperFunctionError(f"{fn} of a non-even superfunction")
        t = self.ctx.scratch
        ft = ex.call(fn, ex.var(t))
        return self._compose_scratch(ft, t)

    def power(self, p) -> "SuperFunction":
        """self^p for arbitrary rational/real p (even argument; body kept
        symbolic, so positivity is the caller's concern)."""
        if isinstance(p, int) and p >= 0:
            return self ** p
        if isinstance(p, Fraction) and p.denominator == 1 and p >= 0:
            return self ** int(p)
        if not self.is_even():
            raise SuperFunctionError("fractional/negative power of a non-even superfunction")
        t = self.ctx.scratch
        ft = ex.power(ex.var(t), ex.Const(p))
        return self._compose_scratch(ft, t)

    def inverse(self) -> "SuperFunction":
        return self.power(-1)

    def _compose_scratch(self, ft: ex.Expr, t: int) -> "SuperFunction":
        body = self.body
        out = self.ctx.zero()
        deriv = ft
        for j, soul_pow in enumerate(self._soul_powers()):
            if j > 0:
                deriv = ex.diff(deriv, t)
            coeff = ex.substitute(deriv, {t: body})
            if j > 1:
                coeff = ex.mul(ex.Const(Fraction(1, math.factorial(j))), coeff)
            out = out + soul_pow.scale(coeff)
        return out

    # -- evaluation / comparison -----------------------------------------------------

    def evaluate(self, point: dict) -> GrassmannElement:
        coef = {m: ex.evaluate(e, point) for m, e in self.comps.items()}
        return GrassmannElement(self.ctx.alg, coef)

    def equals(self, other, tol: float = 1e-12) -> bool:
        if not isinstance(other, SuperFunction):
            other = self.ctx.scalar(other)
        self._check(other)
        masks = set(self.comps) | set(other.comps)
        return all(ex.exprs_equal(self[m], other[m], tol) for m in masks)

    def nf_equals(self, other) -> bool:
        """Exact equality through the monomial normal form (raises
        UnsupportedNormalForm when a coefficient has no such form)."""
        if not isinstance(other, SuperFunction):
            other = self.ctx.scalar(other)
        self._check(other)
        masks = set(self.comps) | set(other.comps)
        return all(ex.nf_equal(self[m], other[m]) for m in masks)

    def __repr__(self):
        if not self.comps:
            return "0"
        parts = []
        for m in sorted(self.comps, key=lambda m: (popcount(m), m)):
            e = self.comps[m]
            if m == 0:
                parts.append(f"({e!r})")
            else:
                parts.append(f"({e!r})*{blade_string(m)}")
        return " + ".join(parts)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_GEN_RE = re.compile(r"q(\d+)")


def parse_superfunction(ctx: SuperContext, text: str, params: dict = None) -> SuperFunction:
    """Parse an expression string into a superfunction.

    On top of the scalar grammar: q<k> are the fermionic generators, X2 the
    supervector square, ABSX its modulus; other bare identifiers are looked
    up in `params` (numbers).  Functions apply by analytic composition, so
    e.g. exp(X2) is legal while exp(q1) is not.
    """
    tree = ex.parse(text, allow_symbols=True)
    return _interpret(ctx, tree, params or {})


def _interpret(ctx: SuperContext, e: ex.Expr, params: dict) -> SuperFunction:
    if isinstance(e, ex.Const):
        return ctx.scalar(e)
    if isinstance(e, ex.Var):
        return ctx.coordinate(e.index)
    if isinstance(e, ex.Symbol):
        m = _GEN_RE.fullmatch(e.name)
        if m:
            return ctx.generator(int(m.group(1)))
        if e.name == "X2":
            return ctx.x_squared()
        if e.name == "ABSX":
            return ctx.modulus()
        if e.name in params:
            return ctx.scalar(params[e.name])
        raise SuperFunctionError(f"unknown identifier {e.name!r}")
    if isinstance(e, ex.Neg):
        return -_interpret(ctx, e.args[0], params)
    if isinstance(e, ex.Add):
        out = ctx.zero()
        for a in e.args:
            out = out + _interpret(ctx, a, params)
        return out
    if isinstance(e, ex.Mul):
        out = ctx.one()
        for a in e.args:
            out = out * _interpret(ctx, a, params)
        return out
    if isinstance(e, ex.Div):
        num = _interpret(ctx, e.args[0], params)
        den = _interpret(ctx, e.args[1], params)
        return num * den.inverse()
    if isinstance(e, ex.Pow):
        base = _interpret(ctx, e.args[0], params)
        expo = e.args[1]
        if isinstance(expo, ex.Symbol) and expo.name in params:
            expo = ex.Const(params[expo.name])
        if not isinstance(expo, ex.Const):
            raise SuperFunctionError("exponent must be a number")
        p = expo.value
        if isinstance(p, Fraction) and p.denominator == 1 and p >= 0:
            return base ** int(p)
        return base.power(p)
    if isinstance(e, ex.Call):
        arg = _interpret(ctx, e.arg, params)
        if e.fn == "sqrt":
            return arg.power(Fraction(1, 2))
        return arg.compose(e.fn)
    raise SuperFunctionError(f"cannot interpret {type(e).__name__}")
