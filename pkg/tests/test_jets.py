"""Truncated Taylor (jet) arithmetic and its use in delta-layer values."""

import math

import numpy as np
import pytest

import superint.expr as ex
from superint.integrate import delta_line_integral
from superint.jets import JetSeries, compose_jets, evaluate_jet, invert_jet


def _jet_of(fn, x0, order, h=1e-3):
    """Crude numerical jet for cross-checks (central differences)."""
    coeffs = [fn(x0)]
    if order >= 1:
        coeffs.append((fn(x0 + h) - fn(x0 - h)) / (2 * h))
    if order >= 2:
        coeffs.append((fn(x0 + h) - 2 * fn(x0) + fn(x0 - h)) / (2 * h * h))
    return coeffs


# ---------------------------------------------------------------- arithmetic

def test_ring_operations():
    u = JetSeries.variable(2.0, 4)         # u(t) = 2 + t
    p = u * u - 3.0 * u + 1.0
    # p(t) = (2+t)^2 - 3(2+t) + 1 = t^2 + t - 1
    assert p.coeffs == pytest.approx([-1.0, 1.0, 1.0, 0.0, 0.0])


def test_division_and_reciprocal():
    u = JetSeries.variable(1.0, 5)
    w = (1.0 / u) * u
    assert w.coeffs == pytest.approx([1.0, 0, 0, 0, 0, 0], abs=1e-15)


def test_elementary_functions_match_series():
    u = JetSeries.variable(0.5, 6)
    e = u.exp()
    want = [math.exp(0.5) / math.factorial(k) for k in range(7)]
    assert e.coeffs == pytest.approx(want, rel=1e-14)
    s = u.sqrt()
    assert (s * s).coeffs == pytest.approx(u.coeffs, rel=1e-14)
    l = u.log()
    assert l.exp().coeffs == pytest.approx(u.coeffs, rel=1e-13)


def test_power_with_fractional_exponent():
    u = JetSeries.variable(2.0, 5)
    p = u.power(0.5)
    assert (p * p).coeffs == pytest.approx(u.coeffs, rel=1e-14)


def test_derivative_shifts_coefficients():
    j = JetSeries([1.0, 2.0, 3.0, 4.0], 3)
    d = j.derivative()
    assert d.coeffs == pytest.approx([2.0, 6.0, 12.0])


def test_evaluate_jet_on_expression():
    e = ex.parse("x1^2 + exp(x1)")
    jet = evaluate_jet(e, {1: JetSeries.variable(1.0, 3)}, 3)
    # value, first, second/2!, third/3! at x1 = 1
    want = [1 + math.e, 2 + math.e, 1 + math.e / 2, math.e / 6]
    assert jet.coeffs == pytest.approx(want, rel=1e-14)


# ---------------------------------------------------------------- inversion

def test_invert_jet_identity_random_phases():
    # phi(s(u)) = phi0 + u up to the jet order, for analytic transversal
    # phases: slope bounded away from zero, higher terms 1/k!-damped.  The
    # round trip is itself a float composition whose rounding grows like
    # slope^(1-2K), so slopes below ~0.7 would measure conditioning of the
    # check rather than correctness of the inverse.
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(100):
        order = int(rng.integers(2, 9))
        slope = float(rng.uniform(0.7, 2.0)) * (-1 if rng.random() < 0.5 else 1)
        coeffs = [float(rng.normal()), slope]
        coeffs += [float(rng.normal()) / math.factorial(k)
                   for k in range(2, order + 1)]
        phi = JetSeries(coeffs, order)
        s = invert_jet(phi)
        assert s.value == 0.0
        back = compose_jets(phi, s)
        target = [phi.coeffs[0], 1.0] + [0.0] * (order - 1)
        worst = max(worst, max(abs(a - b) for a, b in zip(back.coeffs, target)))
    assert worst <= 1e-12


def test_invert_jet_rejects_flat_phase():
    with pytest.raises(ArithmeticError):
        invert_jet(JetSeries([1.0, 0.0, 3.0], 2))


def test_compose_jets_associative():
    rng = np.random.default_rng(9)
    for _ in range(10):
        f = JetSeries([float(rng.normal()) for _ in range(5)], 4)
        g = JetSeries([0.0] + [float(rng.normal()) for _ in range(4)], 4)
        h = JetSeries([0.0] + [float(rng.normal()) for _ in range(4)], 4)
        lhs = compose_jets(compose_jets(f, g), h)
        rhs = compose_jets(f, compose_jets(g, h))
        assert lhs.coeffs == pytest.approx(rhs.coeffs, rel=1e-10, abs=1e-10)


# ------------------------------------------------------- delta layer values

def _delta_radial_closed_form(j, m, radius):
    """integral of delta^(j)(R^2 - r^2) r^(m-1) dr over r in (0, inf).

    With u = R^2 - r^2 the integrand becomes (1/2)(R^2-u)^((m-2)/2), whose
    j-th u-derivative at u = 0 gives the value below.
    """
    c = 0.5
    for i in range(j):
        c *= (m - 2) / 2.0 - i
    return c * radius ** (m - 2 - 2 * j)


@pytest.mark.parametrize("j", [0, 1, 2, 3])
@pytest.mark.parametrize("m", [1, 2, 3, 4, 5])
def test_delta_line_integral_vs_antiderivative(j, m):
    for radius in (0.7, 1.0, 1.6):
        phase = ex.parse(f"{radius}^2 - x1^2")
        weight = ex.parse(f"x1^{m - 1}") if m > 1 else ex.parse("1")
        got = delta_line_integral(phase, weight, j, 1e-9, 4.0)
        want = _delta_radial_closed_form(j, m, radius)
        assert abs(got - want) <= 1e-10 * (1.0 + abs(want))


def test_delta_line_integral_two_roots():
    # phase (1 - r^2)(4 - r^2)-like: two simple zeros inside the window,
    # each contributing 1/|phi'| at order zero
    phase = ex.parse("(1 - x1^2) * (4 - x1^2)")
    got = delta_line_integral(phase, ex.parse("1"), 0, 0.0, 3.0)
    want = 1.0 / 6.0 + 1.0 / 12.0  # |phi'(1)| = 6, |phi'(2)| = 12
    assert got == pytest.approx(want, rel=1e-12)
