"""Finite-dimensional Grassmann algebra with blade-indexed coefficients.

The algebra G_2n is generated by 2n anticommuting symbols q_1, ..., q_2n
(q_j q_k = -q_k q_j, so q_j^2 = 0).  A basis blade q_A is indexed by a subset
A of {1, ..., 2n}, stored as a bitmask (bit j-1 set <=> j in A).  Elements
keep a sparse dict {mask: coefficient}.

Coefficients are exact `fractions.Fraction` values as long as the inputs are
rational; any irrational scalar (math.pi, floats from sqrt, ...) demotes the
affected coefficients to float.  Equality is exact for rationals and uses an
absolute tolerance of 1e-12 otherwise.
"""

from __future__ import annotations

import math
from fractions import Fraction

NUM_TOL = 1e-12

MAX_ODD_PAIRS = 8  # blades are 2^(2n) -- keep n small enough to enumerate


def as_number(c):
    """Normalize a scalar to Fraction (exact) or float."""
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, float):
        return c
    raise TypeError(f"unsupported coefficient type {type(c).__name__}")


def num_is_zero(c, tol=NUM_TOL):
    if isinstance(c, Fraction):
        return c == 0
    return abs(c) <= tol


def num_eq(a, b, tol=NUM_TOL):
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    return abs(float(a) - float(b)) <= tol


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def blade_indices(mask: int):
    """1-based generator indices contained in the blade mask, ascending."""
    out = []
    j = 1
    while mask:
        if mask & 1:
            out.append(j)
        mask >>= 1
        j += 1
    return out


def blade_mul(mask_a: int, mask_b: int):
    """Product q_A * q_B -> (sign, mask) with sign 0 if a generator repeats.

    The sign counts the transpositions needed to merge the concatenation
    (sorted A, sorted B) into sorted order: for each b in B, the number of
    a in A with a > b.
    """
    if mask_a & mask_b:
        return 0, 0
    sign = 1
    b = mask_b
    while b:
        low = b & (-b)
        # generators of A strictly above this generator of B
        above = mask_a & ~((low << 1) - 1)
        if popcount(above) & 1:
            sign = -sign
        b ^= low
    return sign, mask_a | mask_b


def blade_string(mask: int, prefix: str = "q") -> str:
    if mask == 0:
        return "1"
    return "*".join(f"{prefix}{j}" for j in blade_indices(mask))


class GrassmannAlgebra:
    """Context object: fixes n (so 2n generators) and builds elements."""

    def __init__(self, n: int):
        if n < 0 or n > MAX_ODD_PAIRS:
            raise ValueError(f"n must be in 0..{MAX_ODD_PAIRS}, got {n}")
        self.n = n
        self.ngen = 2 * n
        self.top_mask = (1 << self.ngen) - 1

    def __repr__(self):
        return f"GrassmannAlgebra(n={self.n})"

    def __eq__(self, other):
        return isinstance(other, GrassmannAlgebra) and other.n == self.n

    def element(self, coef=None) -> "GrassmannElement":
        return GrassmannElement(self, coef or {})

    def zero(self) -> "GrassmannElement":
        return self.element()

    def one(self) -> "GrassmannElement":
        return self.scalar(1)

    def scalar(self, c) -> "GrassmannElement":
        return self.element({0: as_number(c)})

    def generator(self, j: int) -> "GrassmannElement":
        """q_j, 1-based."""
        if not 1 <= j <= self.ngen:
            raise ValueError(f"generator index {j} out of range 1..{self.ngen}")
        return self.element({1 << (j - 1): Fraction(1)})

    def blade(self, indices) -> "GrassmannElement":
        mask = 0
        for j in indices:
            bit = 1 << (j - 1)
            if mask & bit:
                return self.zero()
            mask |= bit
        # indices may be unsorted; fold in the permutation sign
        sign = 1
        seen = 0
        for j in indices:
            below = seen & ~(((1 << (j - 1)) << 1) - 1)
            if popcount(below) & 1:
                sign = -sign
            seen |= 1 << (j - 1)
        return self.element({mask: Fraction(sign)})

    def fermionic_square(self) -> "GrassmannElement":
        """sum_j q_{2j-1} q_{2j}  (the square of the fermionic vector)."""
        coef = {}
        for j in range(self.n):
            coef[(1 << (2 * j)) | (1 << (2 * j + 1))] = Fraction(1)
        return self.element(coef)


class GrassmannElement:
    __slots__ = ("alg", "coef")

    def __init__(self, alg: GrassmannAlgebra, coef: dict):
        self.alg = alg
        self.coef = {m: c for m, c in coef.items() if not num_is_zero(c)}

    # -- basic structure ---------------------------------------------------

    def items(self):
        return self.coef.items()

    def __getitem__(self, mask: int):
        return self.coef.get(mask, Fraction(0))

    @property
    def body(self):
        """Scalar (blade-0) part."""
        return self.coef.get(0, Fraction(0))

    def soul(self) -> "GrassmannElement":
        """Nilpotent part: everything except the scalar blade."""
        return GrassmannElement(self.alg, {m: c for m, c in self.coef.items() if m})

    def is_zero(self, tol=NUM_TOL) -> bool:
        return all(num_is_zero(c, tol) for c in self.coef.values())

    def grades(self):
        return sorted({popcount(m) for m in self.coef})

    def max_grade(self) -> int:
        return max((popcount(m) for m in self.coef), default=0)

    # -- ring operations ----------------------------------------------------

    def _check(self, other):
        if self.alg != other.alg:
            raise ValueError("elements from different Grassmann algebras")

    def __add__(self, other):
        if not isinstance(other, GrassmannElement):
            other = self.alg.scalar(other)
        self._check(other)
        coef = dict(self.coef)
        for m, c in other.coef.items():
            coef[m] = coef.get(m, Fraction(0)) + c
        return GrassmannElement(self.alg, coef)

    __radd__ = __add__

    def __neg__(self):
        return GrassmannElement(self.alg, {m: -c for m, c in self.coef.items()})

    def __sub__(self, other):
        if not isinstance(other, GrassmannElement):
            other = self.alg.scalar(other)
        return self + (-other)

    def __rsub__(self, other):
        return self.alg.scalar(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, GrassmannElement):
            return self.scale(other)
        self._check(other)
        coef = {}
        for ma, ca in self.coef.items():
            for mb, cb in other.coef.items():
                sign, mask = blade_mul(ma, mb)
                if sign:
                    coef[mask] = coef.get(mask, Fraction(0)) + sign * ca * cb
        return GrassmannElement(self.alg, coef)

    def __rmul__(self, other):
        if isinstance(other, GrassmannElement):  # pragma: no cover
            return other.__mul__(self)
        return self.scale(other)

    def scale(self, c):
        c = as_number(c)
        return GrassmannElement(self.alg, {m: c * v for m, v in self.coef.items()})

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers not defined on Grassmann elements")
        out = self.alg.one()
        for _ in range(k):
            out = out * self
        return out

    # -- involution, derivatives, integral -----------------------------------

    def star(self) -> "GrassmannElement":
        """Grade involution: coefficient of q_A picks up (-1)^|A|."""
        return GrassmannElement(
            self.alg,
            {m: (c if popcount(m) % 2 == 0 else -c) for m, c in self.coef.items()},
        )

    def derivative(self, j: int) -> "GrassmannElement":
        """Left partial derivative with respect to q_j (1-based)."""
        bit = 1 << (j - 1)
        coef = {}
        for m, c in self.coef.items():
            if not (m & bit):
                continue
            below = m & (bit - 1)
            sign = -1 if popcount(below) & 1 else 1
            coef[m ^ bit] = coef.get(m ^ bit, Fraction(0)) + sign * c
        return GrassmannElement(self.alg, coef)

    def rderivative(self, j: int) -> "GrassmannElement":
        """Right partial derivative (acting from the right) w.r.t. q_j."""
        bit = 1 << (j - 1)
        coef = {}
        for m, c in self.coef.items():
            if not (m & bit):
                continue
            above = m & ~((bit << 1) - 1)
            sign = -1 if popcount(above) & 1 else 1
            coef[m ^ bit] = coef.get(m ^ bit, Fraction(0)) + sign * c
        return GrassmannElement(self.alg, coef)

    def top_coefficient(self):
        """Exact coefficient of the top blade q_1...q_2n."""
        return self.coef.get(self.alg.top_mask, Fraction(0))

    def berezin(self) -> float:
        """Berezin integral: pi^{-n} times the top-blade coefficient.

        Equivalent to applying the derivative string d/dq_2n ... d/dq_1 and
        scaling by pi^{-n}.  The pi factor makes the result float; use
        top_coefficient() when exactness matters.
        """
        return float(self.top_coefficient()) * math.pi ** (-self.alg.n)

    # -- comparison / display -------------------------------------------------

    def equals(self, other, tol=NUM_TOL) -> bool:
        if not isinstance(other, GrassmannElement):
            other = self.alg.scalar(other)
        self._check(other)
        masks = set(self.coef) | set(other.coef)
        return all(num_eq(self[m], other[m], tol) for m in masks)

    def __repr__(self):
        if not self.coef:
            return "0"
        parts = []
        for m in sorted(self.coef, key=lambda m: (popcount(m), m)):
            c = self.coef[m]
            if m == 0:
                parts.append(f"{c}")
            else:
                parts.append(f"{c}*{blade_string(m)}")
        return " + ".join(parts)
