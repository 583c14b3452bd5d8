"""Quadrature building blocks: panel Gauss-Legendre, tanh-sinh wrappers,
sphere node sets, exact sphere monomial moments, and 1-d root finding."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import integrate as _sci_integrate
from scipy import special as _sci_special


@lru_cache(maxsize=64)
def _leggauss(order: int):
    return np.polynomial.legendre.leggauss(order)


def gauss_legendre_panels(a: float, b: float, npanels: int = 8, order: int = 24):
    """Composite Gauss-Legendre nodes/weights on [a, b]."""
    base_x, base_w = _leggauss(order)
    edges = np.linspace(a, b, npanels + 1)
    nodes, weights = [], []
    for i in range(npanels):
        lo, hi = edges[i], edges[i + 1]
        half = 0.5 * (hi - lo)
        nodes.append(0.5 * (lo + hi) + half * base_x)
        weights.append(half * base_w)
    return np.concatenate(nodes), np.concatenate(weights)


def tanhsinh(f, a: float, b: float, rtol: float = 1e-12, atol: float = 1e-14):
    """Adaptive tanh-sinh on [a, b]; f must accept ndarray input.  Handles
    integrable endpoint singularities (x^(-1/2), log x)."""
    res = _sci_integrate.tanhsinh(f, a, b, rtol=rtol, atol=atol)
    return float(res.integral)


def tanhsinh_array(f, a, b, rtol: float = 1e-12, atol: float = 1e-14):
    """Batched tanh-sinh: a, b are arrays of limits, f maps arrays of shape
    (len(a), ...) elementwise (abscissae are appended as trailing axes);
    returns the array of integrals."""
    res = _sci_integrate.tanhsinh(f, np.asarray(a, dtype=float),
                                  np.asarray(b, dtype=float),
                                  rtol=rtol, atol=atol)
    return np.asarray(res.integral, dtype=float)


def surface_area(m: int) -> float:
    """Area of the unit sphere in R^m: 2 pi^(m/2) / Gamma(m/2)."""
    return 2.0 * math.pi ** (m / 2.0) / math.gamma(m / 2.0)


def sphere_nodes(m: int, resolution: int = 64):
    """Quadrature nodes/weights on the unit sphere of R^m.

    Returns (points, weights): points shape (N, m), sum of weights = A_m.
    m = 1 is the two-point set {+1, -1}; m = 2 a trapezoid rule on the
    circle (spectrally accurate for smooth integrands); m = 3 a
    Gauss-Legendre x trapezoid product grid.  Higher m stack the recursion
    x = (sqrt(1-t^2) omega, t) with Gauss-Jacobi nodes in t, so the node
    count grows by a factor resolution//2 per dimension.
    """
    if m == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if m == 2:
        t = np.linspace(0.0, 2.0 * math.pi, resolution, endpoint=False)
        pts = np.stack([np.cos(t), np.sin(t)], axis=1)
        w = np.full(resolution, 2.0 * math.pi / resolution)
        return pts, w
    if m == 3:
        nu = max(resolution // 2, 8)
        u, wu = _leggauss(nu)  # u = cos(theta)
        t = np.linspace(0.0, 2.0 * math.pi, resolution, endpoint=False)
        wt = 2.0 * math.pi / resolution
        su = np.sqrt(1.0 - u ** 2)
        pts = np.empty((nu * resolution, 3))
        w = np.empty(nu * resolution)
        k = 0
        for i in range(nu):
            pts[k:k + resolution, 0] = su[i] * np.cos(t)
            pts[k:k + resolution, 1] = su[i] * np.sin(t)
            pts[k:k + resolution, 2] = u[i]
            w[k:k + resolution] = wu[i] * wt
            k += resolution
        return pts, w
    # dS_m = (1 - t^2)^((m-3)/2) dt dS_{m-1};  Gauss-Jacobi absorbs the
    # (1 - t^2) factor exactly, so polynomial moments stay exact.
    nu = max(resolution // 2, 8)
    a = (m - 3) / 2.0
    u, wu = _sci_special.roots_jacobi(nu, a, a)
    sub_pts, sub_w = sphere_nodes(m - 1, resolution)
    su = np.sqrt(1.0 - u ** 2)
    nsub = sub_pts.shape[0]
    pts = np.empty((nu * nsub, m))
    w = np.empty(nu * nsub)
    for i in range(nu):
        pts[i * nsub:(i + 1) * nsub, :m - 1] = su[i] * sub_pts
        pts[i * nsub:(i + 1) * nsub, m - 1] = u[i]
        w[i * nsub:(i + 1) * nsub] = wu[i] * sub_w
    return pts, w


def sphere_monomial_moment(m: int, beta) -> float:
    """Exact integral of omega^beta over the unit sphere of R^m:
    0 when any exponent is odd, else 2 prod Gamma((b_i+1)/2) / Gamma((|b|+m)/2).
    """
    beta = tuple(int(b) for b in beta)
    if len(beta) != m:
        raise ValueError("exponent tuple length must equal m")
    if any(b % 2 for b in beta):
        return 0.0
    total = sum(beta)
    num = 2.0
    for b in beta:
        num *= math.gamma((b + 1) / 2.0)
    return num / math.gamma((total + m) / 2.0)


# ---------------------------------------------------------------------------
# root finding
# ---------------------------------------------------------------------------

class RootFindingError(ArithmeticError):
    pass


def find_roots(f, lo: float, hi: float, nscan: int = 2000, tol: float = 1e-13,
               df=None, tangent_tol: float = 1e-8):
    """Simple roots of a scalar callable on [lo, hi]: grid scan for sign
    changes, bisection, then Newton polish.  Raises on (near-)tangential
    zeros, which the layer calculus cannot handle."""
    xs = np.linspace(lo, hi, nscan + 1)
    vals = np.asarray(f(xs), dtype=float)
    if not np.all(np.isfinite(vals)):
        good = np.isfinite(vals)
        xs, vals = xs[good], vals[good]
        if len(xs) < 2:
            raise RootFindingError("profile not finite on scan range")
    roots = []
    exact_hits = np.flatnonzero(np.abs(vals) == 0.0)
    sign_change = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)
    brackets = [(xs[i], xs[i + 1]) for i in sign_change]
    for i in exact_hits:
        x = xs[i]
        roots.append(float(x))
    for a, b in brackets:
        fa, fb = float(f(a)), float(f(b))
        for _ in range(200):
            mid = 0.5 * (a + b)
            fm = float(f(mid))
            if fm == 0.0 or (b - a) < tol:
                a = b = mid
                break
            if fa * fm < 0:
                b, fb = mid, fm
            else:
                a, fa = mid, fm
        x = 0.5 * (a + b)
        if df is not None:
            for _ in range(8):
                d = float(df(x))
                if d == 0.0:
                    break
                step = float(f(x)) / d
                x -= step
                if abs(step) < tol * max(1.0, abs(x)):
                    break
        roots.append(float(x))
    roots = sorted(set(round(r, 12) for r in roots))
    merged = []
    for r in roots:
        if merged and abs(r - merged[-1]) < 1e-9 * max(1.0, abs(r)):
            continue
        merged.append(r)
    if df is not None:
        for r in merged:
            if abs(float(df(r))) < tangent_tol:
                raise RootFindingError(
                    f"(near-)tangential zero of the profile at {r:.6g}; "
                    "the surface measure is singular there")
    return merged


def sign_intervals(f, lo: float, hi: float, roots, positive: bool = True):
    """Subintervals of [lo, hi] (split at the given roots) where f has the
    requested sign, decided by midpoint sampling."""
    cuts = [lo] + [r for r in roots if lo < r < hi] + [hi]
    out = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b - a < 1e-14:
            continue
        mid = 0.5 * (a + b)
        v = float(f(np.asarray([mid]))[0]) if _vectorized(f) else float(f(mid))
        if (v > 0) == positive and v != 0:
            out.append((a, b))
    return out


def _vectorized(f):
    try:
        out = f(np.asarray([0.5, 0.6]))
        return np.shape(out) == (2,)
    except Exception:
        return False


def gamma_ratio_half(a_twice: int, b_twice: int) -> float:
    """Gamma(a_twice/2) / Gamma(b_twice/2) through scipy, stable at poles of
    the denominator (returns 0 there via the reciprocal)."""
    num_pole = a_twice <= 0 and a_twice % 2 == 0
    den_pole = b_twice <= 0 and b_twice % 2 == 0
    if num_pole and den_pole:
        raise ValueError("0/0 gamma ratio")
    if num_pole:
        raise ZeroDivisionError("gamma pole in the numerator")
    if den_pole:
        return 0.0
    return float(_sci_special.gamma(a_twice / 2.0) * _sci_special.rgamma(b_twice / 2.0))
