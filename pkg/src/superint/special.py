"""Closed forms: exact half-integer gammas, Gauss and Appell hypergeometric
functions (series plus an independent integral route for cross-checking),
the volume/area catalog for the supported shapes, and the sphere integral of
polynomials by iterated Laplacians.

Every catalog value is a plain float produced from exact rational
prefactors where possible; the zero branches at exceptional superdimensions
are taken explicitly, never by evaluating a formula at a gamma pole.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import expr as ex
from . import quadrature as quad
from .superfun import SuperContext, SuperFunction

SQRT_PI = math.sqrt(math.pi)


class GammaPoleError(ZeroDivisionError):
    pass


def gamma_half(two_a: int) -> float:
    """Gamma(two_a / 2), exact: factorials for even arguments, a rational
    multiple of sqrt(pi) for odd ones.  Raises GammaPoleError at the poles
    (even two_a <= 0)."""
    two_a = int(two_a)
    if two_a % 2 == 0:
        k = two_a // 2
        if k <= 0:
            raise GammaPoleError(f"gamma pole at argument {k}")
        return float(math.factorial(k - 1))
    j = (two_a - 1) // 2  # argument is j + 1/2
    c = Fraction(1)
    if j >= 0:
        for i in range(j):
            c *= Fraction(2 * i + 1, 2)
    else:
        # walk Gamma(z) = Gamma(z + 1) / z downward through z = 1/2 - i
        for i in range(1, -j + 1):
            c /= Fraction(1 - 2 * i, 2)
    return float(c) * SQRT_PI


def rgamma_half(two_a: int) -> float:
    """1 / Gamma(two_a / 2) with exact zeros at the poles."""
    try:
        return 1.0 / gamma_half(two_a)
    except GammaPoleError:
        return 0.0


# ---------------------------------------------------------------------------
# Gauss hypergeometric 2F1
# ---------------------------------------------------------------------------

def _is_nonpos_int(a: float) -> bool:
    return float(a).is_integer() and a <= 0


def _hyp2f1_series(a, b, c, z, tol):
    terminating = _is_nonpos_int(a) or _is_nonpos_int(b)
    if not terminating and not abs(z) < 1.0:
        raise ValueError(f"2F1 series needs |z| < 1, got {z}")
    total = 1.0
    term = 1.0
    k = 0
    while True:
        num = (a + k) * (b + k)
        if num == 0.0:
            return total  # terminating series ended
        term *= num / ((c + k) * (1.0 + k)) * z
        total += term
        k += 1
        if not terminating and abs(term) <= tol * (1.0 + abs(total)) and k > 4:
            return total
        if k > 10_000_000:
            raise RuntimeError("2F1 series did not converge")


def hyp2f1(a, b, c, z, tol: float = 5e-16) -> float:
    """2F1(a, b; c; z) for real parameters, z < 1.  Terminating cases (a or
    b a nonpositive integer) are summed directly for any z; otherwise
    negative arguments are mapped into [0, 1) by the Pfaff transformation
    (1-z)^(-a) 2F1(a, c-b; c; z/(z-1))."""
    if _is_nonpos_int(c):
        raise GammaPoleError("2F1 lower parameter at a nonpositive integer")
    if _is_nonpos_int(a) or _is_nonpos_int(b):
        return _hyp2f1_series(a, b, c, z, tol)
    if z >= 1.0:
        raise ValueError("2F1 series route needs z < 1")
    if z < 0.0:
        w = z / (z - 1.0)
        return (1.0 - z) ** (-a) * _hyp2f1_series(a, c - b, c, w, tol)
    return _hyp2f1_series(a, b, c, z, tol)


def hyp2f1_euler(a, b, c, z, rtol: float = 1e-13) -> float:
    """Independent route: Euler's integral representation

        Gamma(c) / (Gamma(b) Gamma(c-b)) *
            integral_0^1 t^(b-1) (1-t)^(c-b-1) (1-z t)^(-a) dt,

    valid for c > b > 0 and z < 1; endpoint singularities are handled by
    the tanh-sinh rule."""
    if not (c > b > 0):
        raise ValueError("Euler representation needs c > b > 0")
    if z >= 1.0:
        raise ValueError("Euler representation needs z < 1")

    def f(t):
        return t ** (b - 1.0) * (1.0 - t) ** (c - b - 1.0) * (1.0 - z * t) ** (-a)

    integral = quad.tanhsinh(f, 0.0, 1.0, rtol=rtol)
    pref = math.gamma(c) / (math.gamma(b) * math.gamma(c - b))
    return pref * integral


# ---------------------------------------------------------------------------
# Appell F1
# ---------------------------------------------------------------------------

def _appell_series(a, b1, b2, c, z1, z2, tol):
    total = 0.0
    row_head = 1.0  # term at (p, 0)
    p = 0
    while True:
        term = row_head
        row_sum = term
        q = 0
        while True:
            num = (a + p + q) * (b2 + q)
            if num == 0.0:
                break
            term *= num / ((c + p + q) * (1.0 + q)) * z2
            row_sum += term
            q += 1
            if abs(term) <= 0.1 * tol * (1.0 + abs(row_sum)) and q > 4:
                break
            if q > 2_000_000:
                raise RuntimeError("Appell series inner loop did not converge")
        total += row_sum
        num = (a + p) * (b1 + p)
        if num == 0.0:
            return total
        row_head *= num / ((c + p) * (1.0 + p)) * z1
        p += 1
        if abs(row_sum) <= tol * (1.0 + abs(total)) and abs(row_head) <= tol * (1.0 + abs(total)) and p > 4:
            return total
        if p > 2_000_000:
            raise RuntimeError("Appell series did not converge")


def appell_f1(a, b1, b2, c, z1, z2, tol: float = 5e-16) -> float:
    """Appell's first hypergeometric F1(a; b1, b2; c; z1, z2) by double
    series; negative arguments are first mapped into [0, 1) x [0, 1) by

        F1(a; b1, b2; c; z1, z2) = (1-z1)^(-b1) (1-z2)^(-b2)
            * F1(c-a; b1, b2; c; z1/(z1-1), z2/(z2-1))."""
    if _is_nonpos_int(c):
        raise GammaPoleError("F1 lower parameter at a nonpositive integer")
    if z1 < 0.0 or z2 < 0.0:
        if z1 >= 1.0 or z2 >= 1.0:
            raise ValueError("F1 arguments must both satisfy z < 1")
        w1, w2 = z1 / (z1 - 1.0), z2 / (z2 - 1.0)
        pref = (1.0 - z1) ** (-b1) * (1.0 - z2) ** (-b2)
        return pref * _appell_series(c - a, b1, b2, c, w1, w2, tol)
    if not (abs(z1) < 1.0 and abs(z2) < 1.0):
        raise ValueError("F1 series needs |z1|, |z2| < 1")
    return _appell_series(a, b1, b2, c, z1, z2, tol)


def appell_f1_euler(a, b1, b2, c, z1, z2, rtol: float = 1e-13) -> float:
    """Independent route: the one-dimensional integral representation

        Gamma(c) / (Gamma(a) Gamma(c-a)) *
            integral_0^1 t^(a-1) (1-t)^(c-a-1) (1-z1 t)^(-b1) (1-z2 t)^(-b2) dt,

    valid for c > a > 0 and z1, z2 < 1."""
    if not (c > a > 0):
        raise ValueError("integral representation needs c > a > 0")
    if z1 >= 1.0 or z2 >= 1.0:
        raise ValueError("integral representation needs z1, z2 < 1")

    def f(t):
        return (t ** (a - 1.0) * (1.0 - t) ** (c - a - 1.0)
                * (1.0 - z1 * t) ** (-b1) * (1.0 - z2 * t) ** (-b2))

    integral = quad.tanhsinh(f, 0.0, 1.0, rtol=rtol)
    pref = math.gamma(c) / (math.gamma(a) * math.gamma(c - a))
    return pref * integral


# ---------------------------------------------------------------------------
# closed-form catalog
# ---------------------------------------------------------------------------

def superball_volume(m: int, n: int, radius: float = 1.0) -> float:
    """pi^(M/2) / Gamma(M/2 + 1) * R^M, zero for M in -2N + 0 (the
    reciprocal gamma vanishes there), with M = m - 2n."""
    M = m - 2 * n
    rg = rgamma_half(M + 2)
    if rg == 0.0:
        return 0.0
    return math.pi ** (M / 2.0) * rg * radius ** M


def supersphere_area(m: int, n: int, radius: float = 1.0) -> float:
    """2 pi^(M/2) / Gamma(M/2) * R^(M-1), zero for M in -2N + 2."""
    M = m - 2 * n
    rg = rgamma_half(M)
    if rg == 0.0:
        return 0.0
    return 2.0 * math.pi ** (M / 2.0) * rg * radius ** (M - 1)


def paraboloid_volume(m: int, n: int, height: float) -> float:
    """Volume of the super-paraboloid of revolution of height h:
    pi^((M-1)/2) / Gamma((M+3)/2) * h^((M+1)/2) for M not in -2N + 1, and
    zero on that exceptional set (an explicit branch: the gamma factor
    itself is finite at M = -1)."""
    if height <= 0:
        raise ValueError("height must be positive")
    M = m - 2 * n
    if M % 2 == 1 and M <= -1:
        return 0.0
    return (math.pi ** ((M - 1) / 2.0) * rgamma_half(M + 3)
            * height ** ((M + 1) / 2.0))


def paraboloid_area(m: int, n: int, height: float) -> float:
    """Surface area of the super-paraboloid of height h:

        pi^((M-1)/2) / Gamma((M+1)/2) * h^((M-1)/2)
            * 2F1(-1/2, (M-1)/2; (M+1)/2; -4h)

    for M > 1.  When 1/Gamma((M-1)/2) = 0 (M in {1, -1, -3, ...}) the area
    vanishes -- the engine reproduces this by exact cancellation of the
    boundary layer contributions.  Other M <= 1 leave a divergent profile
    integral and are rejected."""
    if height <= 0:
        raise ValueError("height must be positive")
    M = m - 2 * n
    if rgamma_half(M - 1) == 0.0:
        return 0.0
    if M <= 1:
        raise ValueError(
            f"paraboloid area diverges for superdimension {M} <= 1")
    return (math.pi ** ((M - 1) / 2.0) * rgamma_half(M + 1)
            * height ** ((M - 1) / 2.0)
            * hyp2f1(-0.5, (M - 1) / 2.0, (M + 1) / 2.0, -4.0 * height))


def hyperboloid_volume(m: int, n: int, half_height: float) -> float:
    """Volume of the super-hyperboloid of revolution of half height h:
    2 h pi^((M-1)/2) / Gamma((M+1)/2) * 2F1((1-M)/2, 1/2; 3/2; -h^2),
    zero for M in -2N + 1 (the reciprocal gamma vanishes there)."""
    if half_height <= 0:
        raise ValueError("half height must be positive")
    M = m - 2 * n
    rg = rgamma_half(M + 1)
    if rg == 0.0:
        return 0.0
    return (2.0 * half_height * math.pi ** ((M - 1) / 2.0) * rg
            * hyp2f1((1.0 - M) / 2.0, 0.5, 1.5, -half_height ** 2))


def hyperboloid_area(m: int, n: int, half_height: float) -> float:
    """Surface area of the super-hyperboloid of half height h:

        4 h pi^((M-1)/2) / Gamma((M-1)/2)
            * F1(1/2; -1/2, (3-M)/2; 3/2; -2h^2, -h^2),

    zero for M in -2N + 3 (the reciprocal gamma vanishes there)."""
    if half_height <= 0:
        raise ValueError("half height must be positive")
    M = m - 2 * n
    rg = rgamma_half(M - 1)
    if rg == 0.0:
        return 0.0
    h2 = half_height ** 2
    return (4.0 * half_height * math.pi ** ((M - 1) / 2.0) * rg
            * appell_f1(0.5, -0.5, (3.0 - M) / 2.0, 1.5, -2.0 * h2, -h2))


@dataclass(frozen=True)
class ClosedFormValue:
    shape: str
    kind: str          # 'volume' | 'area'
    m: int
    n: int
    param: float       # radius / height / half height
    value: float
    is_zero_branch: bool


_CATALOG = {
    ("ball", "volume"): (superball_volume, "radius"),
    ("sphere", "area"): (supersphere_area, "radius"),
    ("paraboloid", "volume"): (paraboloid_volume, "height"),
    ("paraboloid", "area"): (paraboloid_area, "height"),
    ("hyperboloid", "volume"): (hyperboloid_volume, "half height"),
    ("hyperboloid", "area"): (hyperboloid_area, "half height"),
}


def catalog(shape: str, kind: str, m: int, n: int, param: float = 1.0) -> ClosedFormValue:
    """Closed-form volume/area lookup.  Shapes: ball, sphere, paraboloid,
    hyperboloid; kinds: volume, area (sphere only has area, ball only
    volume)."""
    key = (shape, kind)
    if key not in _CATALOG:
        valid = ", ".join(f"{s}/{k}" for s, k in sorted(_CATALOG))
        raise KeyError(f"no closed form for {shape}/{kind}; have {valid}")
    fn, _ = _CATALOG[key]
    value = fn(m, n, param)
    return ClosedFormValue(shape=shape, kind=kind, m=m, n=n, param=param,
                           value=value, is_zero_branch=(value == 0.0))


# ---------------------------------------------------------------------------
# sphere integral of polynomials by iterated Laplacians
# ---------------------------------------------------------------------------

def pizzetti_sphere_integral(P: SuperFunction) -> float:
    """Integral over the unit supersphere of a polynomial superfunction:

        sum_j (-1)^j * 2 pi^(M/2) / (2^(2j) j! Gamma(j + M/2)) * (Delta^j P)(0),

    the series terminating because the super Laplacian eventually
    annihilates any polynomial."""
    ctx = P.ctx
    M = ctx.m - 2 * ctx.n
    total = 0.0
    cur = P
    j = 0
    while not cur.is_zero():
        if j > 200:
            raise RuntimeError(
                "Laplacian iteration did not terminate; is the input polynomial?")
        rg = rgamma_half(2 * j + M)
        if rg != 0.0:
            at0 = float(ex.evaluate(cur.body, {i: 0.0 for i in range(1, ctx.m + 1)}))
            coeff = 2.0 * math.pi ** (M / 2.0) / (4.0 ** j * math.factorial(j))
            sign = -1.0 if j % 2 else 1.0
            total += sign * coeff * rg * at0
        cur = cur.laplacian()
        j += 1
    return total
