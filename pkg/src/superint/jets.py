"""Truncated Taylor series ("jets") with float or numpy-array coefficients.

The radial reduction turns every fermionic integral into derivatives of a
profile at a root, i.e. into arithmetic on truncated series.  Coefficients
may be plain floats or ndarrays of a common shape, so one jet computation
can serve a whole batch of angular quadrature nodes at once.
"""

from __future__ import annotations

import math

import numpy as np


class JetError(ArithmeticError):
    pass


def _as_coeff(v):
    if isinstance(v, np.ndarray):
        return v.astype(float)
    return float(v)


class JetSeries:
    """Coefficients c[0..order] of sum c_k t^k, truncated beyond `order`."""

    __slots__ = ("coeffs", "order")

    # keep numpy from absorbing us in mixed arithmetic; our __radd__ etc.
    # must win so array coefficients broadcast inside the jet
    __array_ufunc__ = None

    def __init__(self, coeffs, order=None):
        coeffs = [_as_coeff(c) for c in coeffs]
        if order is None:
            order = len(coeffs) - 1
        if len(coeffs) != order + 1:
            coeffs = coeffs[: order + 1] + [0.0] * (order + 1 - len(coeffs))
        self.coeffs = coeffs
        self.order = order

    @classmethod
    def constant(cls, value, order):
        return cls([value] + [0.0] * order, order)

    @classmethod
    def variable(cls, value, order):
        """The jet of t |-> value + t."""
        if order == 0:
            return cls([value], 0)
        return cls([value, 1.0] + [0.0] * (order - 1), order)

    def __getitem__(self, k):
        return self.coeffs[k] if k <= self.order else 0.0

    @property
    def value(self):
        return self.coeffs[0]

    def map_coeffs(self, fn):
        return JetSeries([fn(c) for c in self.coeffs], self.order)

    def __add__(self, other):
        if not isinstance(other, JetSeries):
            out = list(self.coeffs)
            out[0] = out[0] + _as_coeff(other)
            return JetSeries(out, self.order)
        K = min(self.order, other.order)
        return JetSeries([self[k] + other[k] for k in range(K + 1)], K)

    __radd__ = __add__

    def __neg__(self):
        return JetSeries([-c for c in self.coeffs], self.order)

    def __sub__(self, other):
        return self + (-other if isinstance(other, JetSeries) else -_as_coeff(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, JetSeries):
            c = _as_coeff(other)
            return JetSeries([x * c for x in self.coeffs], self.order)
        K = min(self.order, other.order)
        out = []
        for k in range(K + 1):
            acc = self[0] * other[k]
            for i in range(1, k + 1):
                acc = acc + self[i] * other[k - i]
            out.append(acc)
        return JetSeries(out, K)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, JetSeries):
            return self * other.power(-1)
        return self * (1.0 / _as_coeff(other))

    def __rtruediv__(self, other):
        return self.power(-1) * other

    def derivative(self):
        if self.order == 0:
            return JetSeries([0.0 * self.coeffs[0]], 0)
        return JetSeries([(k + 1) * self.coeffs[k + 1] for k in range(self.order)],
                         self.order - 1)

    def compose_taylor(self, derivs):
        """Compose an outer analytic function given its derivative values
        derivs[k] = f^(k)(u0) at u0 = self.value; k runs to self.order."""
        if len(derivs) < self.order + 1:
            raise JetError("not enough outer derivatives")
        w = JetSeries([self.coeffs[0] * 0.0] + self.coeffs[1:], self.order)
        # Horner on the Taylor coefficients; w has zero constant term
        K = self.order
        acc = JetSeries.constant(derivs[K] / math.factorial(K), K)
        for k in range(K - 1, -1, -1):
            acc = acc * w + (derivs[k] / math.factorial(k))
        return acc

    def power(self, p):
        """self^p for arbitrary real p (base value must avoid 0 unless p is
        a nonnegative integer)."""
        if float(p).is_integer() and p >= 0:
            k = int(p)
            out = JetSeries.constant(1.0, self.order)
            base = self
            while k:
                if k & 1:
                    out = out * base
                base = base * base
                k >>= 1
            return out
        u0 = self.value
        if np.any(np.asarray(u0) == 0.0):
            raise JetError("power with non-integer/negative exponent at 0 base")
        derivs = []
        fall = 1.0
        for k in range(self.order + 1):
            derivs.append(fall * u0 ** (p - k))
            fall *= (p - k)
        return self.compose_taylor(derivs)

    def sqrt(self):
        return self.power(0.5)

    def exp(self):
        e0 = np.exp(self.value)
        return self.compose_taylor([e0] * (self.order + 1))

    def log(self):
        u0 = self.value
        derivs = [np.log(u0)]
        for k in range(1, self.order + 1):
            derivs.append((-1.0) ** (k - 1) * math.factorial(k - 1) * u0 ** (-k))
        return self.compose_taylor(derivs)

    def sin(self):
        s0, c0 = np.sin(self.value), np.cos(self.value)
        cycle = [s0, c0, -s0, -c0]
        return self.compose_taylor([cycle[k % 4] for k in range(self.order + 1)])

    def cos(self):
        s0, c0 = np.sin(self.value), np.cos(self.value)
        cycle = [c0, -s0, -c0, s0]
        return self.compose_taylor([cycle[k % 4] for k in range(self.order + 1)])

    def asinh(self):
        # asinh u = log(u + sqrt(u^2 + 1)); jet composition keeps it honest
        return (self + (self * self + 1.0).sqrt()).log()

    def absval(self):
        v = np.asarray(self.value)
        if np.any(v == 0.0):
            raise JetError("abs is not smooth at 0")
        sign = np.sign(v) if isinstance(self.value, np.ndarray) else math.copysign(1.0, self.value)
        return self * sign

    def __repr__(self):
        return f"JetSeries({self.coeffs!r})"


def invert_jet(phi: JetSeries) -> JetSeries:
    """Compositional inverse of a jet with phi.coeffs[0] arbitrary and
    phi.coeffs[1] != 0: returns s with phi(s(u)) = phi0 + u through the
    common order, s.value = 0 (s is the offset from the expansion point).
    """
    K = phi.order
    if K < 1:
        raise JetError("need at least a linear term to invert")
    a1 = phi.coeffs[1]
    if np.any(np.asarray(a1) == 0.0):
        raise JetError("cannot invert a jet with vanishing linear term")
    # phihat(t) = phi(t) - phi0 has zero constant term; solve phihat(s) = u
    # by the contraction s <- (u - (phihat(s) - a1 s)) / a1, gaining one
    # order per pass.
    zero0 = 0.0 * phi.coeffs[0]
    phihat = JetSeries([zero0] + phi.coeffs[1:], K)
    u = JetSeries.variable(zero0, K)
    s = u * (1.0 / a1)
    for _ in range(K):
        corr = _compose_zero(phihat, s) - s * a1
        s = (u - corr) * (1.0 / a1)
    # one Newton pass in series space mops up the rounding the K contraction
    # sweeps accumulate; phihat' is a degree K-1 polynomial, so padding its
    # jet back to order K with a zero is exact, not a truncation
    dphi = JetSeries([(k + 1) * phihat.coeffs[k + 1] for k in range(K)]
                     + [zero0], K)
    res = _compose_zero(phihat, s) - u
    return s - res * _compose_zero(dphi, s).power(-1)

def _compose_zero(outer: JetSeries, inner: JetSeries) -> JetSeries:
    """outer(inner(t)) where inner has zero constant term (exact under
    truncation)."""
    K = min(outer.order, inner.order)
    acc = JetSeries.constant(outer[K], K)
    for k in range(K - 1, -1, -1):
        acc = acc * inner + outer[k]
    return acc


def compose_jets(outer: JetSeries, inner: JetSeries) -> JetSeries:
    """outer evaluated along inner, treating outer as the jet of f at
    inner.value (i.e. outer[k] = f^(k)(inner.value)/k! ... standard series
    composition with the inner offset)."""
    w = JetSeries([inner.coeffs[0] * 0.0] + inner.coeffs[1:], inner.order)
    return _compose_zero(outer, w)


def evaluate_jet(e, env: dict, order: int) -> JetSeries:
    """Evaluate a scalar expression with jets substituted for variables.

    env maps variable index -> JetSeries | float | ndarray; plain values
    become constant jets.  This is how the radial layer obtains derivative
    stacks of weights along a root curve without symbolic differentiation.
    """
    from . import expr as ex  # local import keeps expr jet-free

    def conv(v):
        return v if isinstance(v, JetSeries) else JetSeries.constant(v, order)

    def rec(node):
        if isinstance(node, ex.Const):
            return JetSeries.constant(float(node.value), order)
        if isinstance(node, ex.Var):
            if node.index not in env:
                raise JetError(f"no jet for x{node.index}")
            return conv(env[node.index])
        if isinstance(node, ex.Neg):
            return -rec(node.args[0])
        if isinstance(node, ex.Add):
            acc = rec(node.args[0])
            for a in node.args[1:]:
                acc = acc + rec(a)
            return acc
        if isinstance(node, ex.Mul):
            acc = rec(node.args[0])
            for a in node.args[1:]:
                acc = acc * rec(a)
            return acc
        if isinstance(node, ex.Div):
            return rec(node.args[0]) / rec(node.args[1])
        if isinstance(node, ex.Pow):
            expo = node.args[1]
            if not isinstance(expo, ex.Const):
                raise JetError("jet evaluation needs numeric exponents")
            return rec(node.args[0]).power(float(expo.value))
        if isinstance(node, ex.Call):
            u = rec(node.arg)
            return {"exp": u.exp, "log": u.log, "sqrt": u.sqrt, "sin": u.sin,
                    "cos": u.cos, "asinh": u.asinh, "abs": u.absval}[node.fn]()
        raise JetError(f"cannot jet-evaluate {type(node).__name__}")

    return rec(e)
