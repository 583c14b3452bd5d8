"""Mixed Clifford algebra over a superfunction coefficient ring.

Units: e_1..e_m with e_j e_k + e_k e_j = -2 delta_{jk}, and eh_1..eh_{2n}
("eh" = the units attached to the anticommuting variables) with

    e_j eh_k + eh_k e_j = 0,
    eh_j eh_k - eh_k eh_j = g_{jk},   g_{2p-1,2p} = 1 = -g_{2p,2p-1},

all other g entries zero.  The eh units are therefore Weyl-type: not
nilpotent, with only the in-pair commutator nontrivial.  Words are kept in
the normal order  e-blade * eh_1^a1 ... eh_{2n}^a_{2n}, and reordering uses
the in-pair rule  B A = A B - 1  (A = eh_{2p-1}, B = eh_{2p}).

Crucially, all commuting/anticommuting *variables* commute with all units;
only the blade/word structure carries signs.  So an element is a dict
word -> SuperFunction and products factor as (coefficient product) x
(word product).
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

from . import expr as ex
from .grassmann import popcount
from .superfun import SuperContext, SuperFunction


class CliffordError(ValueError):
    pass


# A word is (emask, epows): bitmask over e_1..e_m and a tuple of 2n
# exponents for the eh units in fixed order.


def scalar_word(n: int):
    return (0, (0,) * (2 * n))


def eblade_mul(mask_a: int, mask_b: int):
    """e_A * e_B -> (sign, mask) with e_j^2 = -1 (repeats annihilate into
    a sign instead of killing the term)."""
    sign = 1
    b = mask_b
    while b:
        low = b & (-b)
        above = mask_a & ~((low << 1) - 1)
        if popcount(above) & 1:
            sign = -sign
        b ^= low
    if popcount(mask_a & mask_b) & 1:
        sign = -sign
    return sign, mask_a ^ mask_b


def _pair_mul(p1, p2, q1, q2):
    """(A^p1 B^p2)(A^q1 B^q2) normal-ordered, one Weyl pair (BA = AB - 1).

    Returns [(coeff, (a_pow, b_pow)), ...] by the Wick-style expansion
    B^p A^q = sum_i (-1)^i i! C(p,i) C(q,i) A^(q-i) B^(p-i).
    """
    out = []
    for i in range(min(p2, q1) + 1):
        c = Fraction(math.comb(p2, i) * math.comb(q1, i) * math.factorial(i))
        if i % 2:
            c = -c
        out.append((c, (p1 + q1 - i, p2 + q2 - i)))
    return out


def word_mul(n: int, w1, w2):
    """Normal-ordered product of two words: yields (coeff, word) terms."""
    (ma, pa), (mb, pb) = w1, w2
    sign = Fraction(1)
    # slide w2's e-blade left across w1's eh-monomial (they anticommute)
    if (sum(pa) & 1) and (popcount(mb) & 1):
        sign = -sign
    s, emask = eblade_mul(ma, mb)
    sign *= s
    if n == 0:
        yield sign, (emask, ())
        return
    pair_terms = [_pair_mul(pa[2 * p], pa[2 * p + 1], pb[2 * p], pb[2 * p + 1])
                  for p in range(n)]
    for combo in itertools.product(*pair_terms):
        c = sign
        epows = []
        for cc, (a, b) in combo:
            c *= cc
            epows.append(a)
            epows.append(b)
        yield c, (emask, tuple(epows))


def word_string(m: int, word) -> str:
    emask, epows = word
    parts = [f"e{j + 1}" for j in range(m) if emask >> j & 1]
    for j, p in enumerate(epows):
        if p == 1:
            parts.append(f"eh{j + 1}")
        elif p > 1:
            parts.append(f"eh{j + 1}^{p}")
    return "*".join(parts) if parts else "1"


class MixedCliffordElement:
    """Finite sum of normal-ordered words with superfunction coefficients."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: SuperContext, terms: dict):
        self.ctx = ctx
        self.terms = {w: f for w, f in terms.items() if not f.is_zero()}

    # -- constructors ---------------------------------------------------------

    @classmethod
    def zero(cls, ctx):
        return cls(ctx, {})

    @classmethod
    def from_superfunction(cls, ctx, f: SuperFunction):
        return cls(ctx, {scalar_word(ctx.n): f})

    @classmethod
    def e_unit(cls, ctx, j: int):
        if not 1 <= j <= ctx.m:
            raise CliffordError(f"e index {j} out of range 1..{ctx.m}")
        return cls(ctx, {(1 << (j - 1), (0,) * (2 * ctx.n)): ctx.one()})

    @classmethod
    def eh_unit(cls, ctx, j: int):
        if not 1 <= j <= 2 * ctx.n:
            raise CliffordError(f"eh index {j} out of range 1..{2 * ctx.n}")
        epows = [0] * (2 * ctx.n)
        epows[j - 1] = 1
        return cls(ctx, {(0, tuple(epows)): ctx.one()})

    # -- structure --------------------------------------------------------------

    def __getitem__(self, word) -> SuperFunction:
        return self.terms.get(word, self.ctx.zero())

    def words(self):
        return self.terms.keys()

    def is_zero(self) -> bool:
        return not self.terms

    def scalar_part(self) -> SuperFunction:
        return self[scalar_word(self.ctx.n)]

    def is_scalar(self) -> bool:
        sw = scalar_word(self.ctx.n)
        return all(w == sw for w in self.terms)

    def _check(self, other):
        if self.ctx != other.ctx:
            raise CliffordError("elements from different contexts")

    def _coerce(self, other) -> "MixedCliffordElement":
        if isinstance(other, MixedCliffordElement):
            return other
        if isinstance(other, SuperFunction):
            return MixedCliffordElement.from_superfunction(self.ctx, other)
        return MixedCliffordElement.from_superfunction(self.ctx, self.ctx.scalar(other))

    # -- algebra ------------------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        self._check(other)
        terms = dict(self.terms)
        for w, f in other.terms.items():
            terms[w] = terms[w] + f if w in terms else f
        return MixedCliffordElement(self.ctx, terms)

    __radd__ = __add__

    def __neg__(self):
        return MixedCliffordElement(self.ctx, {w: -f for w, f in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + self._coerce(other)

    def scale(self, c) -> "MixedCliffordElement":
        return MixedCliffordElement(self.ctx, {w: f.scale(c) for w, f in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, MixedCliffordElement):
            if isinstance(other, SuperFunction):
                # coefficients commute with words: right mult by a scalar
                # superfunction only reorders Grassmann blades
                return MixedCliffordElement(
                    self.ctx, {w: f * other for w, f in self.terms.items()})
            return self.scale(other)
        self._check(other)
        out = {}
        for w1, f1 in self.terms.items():
            for w2, f2 in other.terms.items():
                coeff = f1 * f2
                if coeff.is_zero():
                    continue
                for c, w in word_mul(self.ctx.n, w1, w2):
                    t = coeff.scale(c)
                    out[w] = out[w] + t if w in out else t
        return MixedCliffordElement(self.ctx, out)

    def __rmul__(self, other):
        if isinstance(other, SuperFunction):
            return MixedCliffordElement(
                self.ctx, {w: other * f for w, f in self.terms.items()})
        return self.scale(other)

    # -- comparison ------------------------------------------------------------------

    def equals(self, other, tol: float = 1e-12) -> bool:
        other = self._coerce(other)
        self._check(other)
        words = set(self.terms) | set(other.terms)
        return all(self[w].equals(other[w], tol) for w in words)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for w in sorted(self.terms):
            parts.append(f"[{self.terms[w]!r}]*{word_string(self.ctx.m, w)}")
        return " + ".join(parts)


# ---------------------------------------------------------------------------
# supervector and Dirac operators
# ---------------------------------------------------------------------------

def supervector(ctx: SuperContext) -> MixedCliffordElement:
    """x = sum_k x_k e_k + sum_j q_j eh_j."""
    terms = {}
    for k in range(1, ctx.m + 1):
        terms[(1 << (k - 1), (0,) * (2 * ctx.n))] = ctx.coordinate(k)
    for j in range(1, 2 * ctx.n + 1):
        epows = [0] * (2 * ctx.n)
        epows[j - 1] = 1
        terms[(0, tuple(epows))] = ctx.generator(j)
    return MixedCliffordElement(ctx, terms)


def _as_mce(ctx, F) -> MixedCliffordElement:
    if isinstance(F, MixedCliffordElement):
        return F
    if isinstance(F, SuperFunction):
        return MixedCliffordElement.from_superfunction(ctx, F)
    return MixedCliffordElement.from_superfunction(ctx, ctx.scalar(F))


def dirac_left(ctx: SuperContext, F) -> MixedCliffordElement:
    """The super Dirac operator from the left:
    d_x = d_fermionic - d_bosonic, with
    d_bosonic = sum_k e_k d_{x_k} and
    d_fermionic = 2 sum_j (eh_{2j} d_{q_{2j-1}} - eh_{2j-1} d_{q_{2j}}).
    Satisfies d_x[x] = m - 2n.
    """
    F = _as_mce(ctx, F)
    out = MixedCliffordElement.zero(ctx)
    for w, f in F.terms.items():
        terms = {}
        for k in range(1, ctx.m + 1):
            df = f.bosonic_diff(k)
            if not df.is_zero():
                _acc_word(terms, ctx.n, (1 << (k - 1), (0,) * (2 * ctx.n)), w, -df)
        for j in range(1, ctx.n + 1):
            d1 = f.fermionic_diff(2 * j - 1)
            if not d1.is_zero():
                _acc_word(terms, ctx.n, _eh_word(ctx.n, 2 * j), w, d1.scale(2))
            d2 = f.fermionic_diff(2 * j)
            if not d2.is_zero():
                _acc_word(terms, ctx.n, _eh_word(ctx.n, 2 * j - 1), w, d2.scale(-2))
        out = out + MixedCliffordElement(ctx, terms)
    return out


def dirac_right(ctx: SuperContext, F) -> MixedCliffordElement:
    """The super Dirac operator acting from the right:
    [F] d_x = -[F] d_fermionic - [F] d_bosonic, with right fermionic
    derivatives and units multiplying each word from the right.
    Satisfies [x] d_x = m - 2n.
    """
    F = _as_mce(ctx, F)
    out = MixedCliffordElement.zero(ctx)
    for w, f in F.terms.items():
        terms = {}
        for k in range(1, ctx.m + 1):
            df = f.bosonic_diff(k)
            if not df.is_zero():
                _acc_word(terms, ctx.n, w, (1 << (k - 1), (0,) * (2 * ctx.n)), -df)
        for j in range(1, ctx.n + 1):
            d1 = f.fermionic_rdiff(2 * j - 1)
            if not d1.is_zero():
                _acc_word(terms, ctx.n, w, _eh_word(ctx.n, 2 * j), d1.scale(-2))
            d2 = f.fermionic_rdiff(2 * j)
            if not d2.is_zero():
                _acc_word(terms, ctx.n, w, _eh_word(ctx.n, 2 * j - 1), d2.scale(2))
        out = out + MixedCliffordElement(ctx, terms)
    return out


def _eh_word(n: int, j: int):
    epows = [0] * (2 * n)
    epows[j - 1] = 1
    return (0, tuple(epows))


def _acc_word(terms, n, w1, w2, coeff: SuperFunction):
    for c, w in word_mul(n, w1, w2):
        t = coeff.scale(c)
        terms[w] = terms[w] + t if w in terms else t


def vector_modulus(v: MixedCliffordElement) -> SuperFunction:
    """|v| = (-v^2)^(1/2) for a Clifford element whose square is scalar
    (true for supervector-like v, e.g. Dirac derivatives of even phases)."""
    sq = v * v
    scal = scalar_word(v.ctx.n)
    # cross terms cancel only up to expression rewriting (x1*x2 - x2*x1)
    bad = [w for w in sq.words()
           if w != scal and not all(ex.exprs_equal(e, ex.ZERO)
                                    for e in sq[w].comps.values())]
    if bad:
        raise CliffordError(f"square is not scalar; extra words {bad[:4]}")
    return (-sq.scalar_part()).power(Fraction(1, 2))


def laplacian_mce(ctx: SuperContext, F) -> MixedCliffordElement:
    """d_x(d_x F), word by word; equals the scalar Laplacian on scalars."""
    return dirac_left(ctx, dirac_left(ctx, F))
