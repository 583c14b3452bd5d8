"""Distribution expansions: delta/Heaviside of even superfunctions and the
exact rewriting identities they satisfy."""

import math

import numpy as np
import pytest

from superint import expr as ex
from superint.superfun import SuperContext, parse_superfunction
from superint.clifford import MixedCliffordElement, dirac_left
from superint.distrib import (
    DistributionError,
    DistributionExpansion,
    expand_delta,
    expand_heaviside,
)

# ---------------------------------------------------------------------------
# random even phases with rational coefficients
# ---------------------------------------------------------------------------


def _rand_coeff(rng):
    p = int(rng.integers(-4, 5))
    q = int(rng.integers(1, 4))
    return f"({p}/{q})"


def _rand_body(ctx, rng):
    # degree <= 2 polynomial anchored at 1 so it never collapses to zero
    terms = ["1"]
    for k in range(1, ctx.m + 1):
        if rng.integers(0, 2):
            terms.append(f"{_rand_coeff(rng)}*x{k}")
        if rng.integers(0, 2):
            terms.append(f"{_rand_coeff(rng)}*x{k}^2")
    return " + ".join(terms)


def _rand_even_phase(ctx, rng):
    parts = [_rand_body(ctx, rng)]
    for i in range(ctx.n):
        a, b = 2 * i + 1, 2 * i + 2
        parts.append(f"({_rand_body(ctx, rng)})*q{a}*q{b}")
    if ctx.n == 2 and rng.integers(0, 2):
        parts.append(f"{_rand_coeff(rng)}*q1*q2*q3*q4")
    return parse_superfunction(ctx, " + ".join(parts))


_CTXS = [SuperContext(2, 1), SuperContext(3, 1), SuperContext(2, 2)]


# ---------------------------------------------------------------------------
# structure of the expansions
# ---------------------------------------------------------------------------


def test_expand_delta_structure():
    """delta(body + soul) Taylor-expands in the nilpotent soul."""
    ctx = SuperContext(2, 2)
    g = parse_superfunction(ctx, "x1 + x2*q1*q2 + q3*q4")
    d = expand_delta(ctx, g)
    assert ex.nf_equal(d.phase0, ex.parse("x1"))
    assert d.delta_orders() == [0, 1, 2]
    assert d.heavi.is_zero() and d.smooth.is_zero()
    one = MixedCliffordElement.from_superfunction(ctx, ctx.one())
    assert d.delta[0].equals(one)
    assert d.delta[1].equals(MixedCliffordElement.from_superfunction(
        ctx, parse_superfunction(ctx, "x2*q1*q2 + q3*q4")))
    # soul^2 / 2 = x2 q1q2q3q4
    assert d.delta[2].equals(MixedCliffordElement.from_superfunction(
        ctx, parse_superfunction(ctx, "x2*q1*q2*q3*q4")))


def test_expand_heaviside_structure():
    ctx = SuperContext(2, 1)
    g = parse_superfunction(ctx, "x1 - 1 + x2*q1*q2")
    h = expand_heaviside(ctx, g)
    assert h.has_distribution() and not h.is_smooth()
    assert h.heavi.equals(MixedCliffordElement.from_superfunction(ctx, ctx.one()))
    assert h.delta_orders() == [0]
    assert h.delta[0].equals(MixedCliffordElement.from_superfunction(
        ctx, parse_superfunction(ctx, "x2*q1*q2")))


def test_smooth_expansion_has_no_phase():
    ctx = SuperContext(2, 1)
    s = DistributionExpansion.from_smooth(ctx, parse_superfunction(ctx, "x1*q1"))
    assert s.is_smooth() and s.phase0 is None
    with pytest.raises(DistributionError):
        DistributionExpansion(ctx, None, delta={0: ctx.one()})


def test_odd_phase_is_rejected():
    ctx = SuperContext(2, 1)
    with pytest.raises(DistributionError):
        expand_delta(ctx, parse_superfunction(ctx, "x1*q1"))


# ---------------------------------------------------------------------------
# annihilation / lowering identities
# ---------------------------------------------------------------------------


def test_phase_power_lowering_and_annihilation():
    """g^j delta^(j)(g) = (-1)^j j! delta(g), and one more power kills it.

    Checked as exact expansions (rational coefficients) on random even
    phases with nilpotent souls; both sides are put in reduced form, where
    the delta coefficients are taken modulo the bosonic phase.
    """
    rng = np.random.default_rng(20260816)
    for trial in range(50):
        ctx = _CTXS[trial % len(_CTXS)]
        g = _rand_even_phase(ctx, rng)
        j = trial % 3
        lhs = expand_delta(ctx, g, order=j).mul_left(g ** j).reduce_phase_powers()
        rhs = expand_delta(ctx, g).scale(ex.const((-1) ** j * math.factorial(j)))
        assert lhs.equals(rhs.reduce_phase_powers()), (trial, j)
        killed = expand_delta(ctx, g, order=j).mul_left(g ** (j + 1))
        killed = killed.reduce_phase_powers()
        assert killed.is_smooth() and killed.smooth.is_zero(), (trial, j)


def test_reduce_phase_powers_single_step():
    # g0 * delta'(g0) = -delta(g0), frozen by hand
    ctx = SuperContext(2, 1)
    g0 = ex.parse("x1 - 2")
    e = DistributionExpansion(
        ctx, g0, delta={1: parse_superfunction(ctx, "x1 - 2")})
    r = e.reduce_phase_powers()
    assert r.delta_orders() == [0]
    minus_one = MixedCliffordElement.from_superfunction(
        ctx, ctx.one().scale(ex.const(-1)))
    assert r.delta[0].equals(minus_one)


# ---------------------------------------------------------------------------
# reflection of the phase
# ---------------------------------------------------------------------------


def test_delta_reflection():
    """delta^(j)(-g) = (-1)^j delta^(j)(g), rewritten to the common phase."""
    rng = np.random.default_rng(7)
    for trial in range(20):
        ctx = _CTXS[trial % len(_CTXS)]
        g = _rand_even_phase(ctx, rng)
        j = trial % 3
        lhs = expand_delta(ctx, -g, order=j)
        rhs = expand_delta(ctx, g, order=j).scale(ex.const((-1) ** j)).negate_phase()
        assert lhs.equals(rhs), (trial, j)


def test_heaviside_reflection():
    # H(-g) = 1 - H(g)
    rng = np.random.default_rng(8)
    for trial in range(12):
        ctx = _CTXS[trial % len(_CTXS)]
        g = _rand_even_phase(ctx, rng)
        lhs = expand_heaviside(ctx, -g)
        rhs = DistributionExpansion.from_smooth(ctx, ctx.one()) - expand_heaviside(ctx, g)
        assert lhs.equals(rhs.negate_phase()), trial


def test_negate_phase_is_an_involution():
    ctx = SuperContext(2, 1)
    g = parse_superfunction(ctx, "x1^2 + x2 + (1 + x1)*q1*q2")
    e = expand_heaviside(ctx, g) + expand_delta(ctx, g, order=1)
    back = e.negate_phase().negate_phase()
    assert back.equals(e)
    assert ex.nf_equal(back.phase0, e.phase0)


# ---------------------------------------------------------------------------
# removing an invertible bosonic factor from the phase
# ---------------------------------------------------------------------------


def test_positive_factor_rescaling():
    """delta(h*g) = delta(g)/h for a positive bosonic factor h.

    The left side is expanded in the product phase and then rewritten
    relative to g's body; the right side divides by the superfunction
    inverse of h directly.
    """
    rng = np.random.default_rng(99)
    for trial in range(15):
        ctx = _CTXS[trial % len(_CTXS)]
        g = _rand_even_phase(ctx, rng)
        h = parse_superfunction(
            ctx, f"2 + ({_rand_coeff(rng)})^2*x1^2 + x{ctx.m}^2")
        lhs = expand_delta(ctx, h * g).rescaled(h.body, g.body)
        rhs = expand_delta(ctx, g).mul_left(h.inverse())
        assert lhs.equals(rhs), trial


def test_rescaled_rejects_wrong_factorization():
    ctx = SuperContext(2, 1)
    g = parse_superfunction(ctx, "1 + x1 + q1*q2")
    with pytest.raises(DistributionError):
        expand_delta(ctx, g).rescaled(ex.parse("x1"), g.body)


# ---------------------------------------------------------------------------
# chain rules through the Heaviside layer
# ---------------------------------------------------------------------------


def test_derivative_chain_rules():
    rng = np.random.default_rng(55)
    for trial in range(12):
        ctx = _CTXS[trial % len(_CTXS)]
        g = _rand_even_phase(ctx, rng)
        H = expand_heaviside(ctx, g)
        dg = expand_delta(ctx, g)
        k = 1 + trial % ctx.m
        assert H.bosonic_diff(k).equals(dg.mul_left(g.bosonic_diff(k))), trial
        j = 1 + trial % (2 * ctx.n)
        assert H.fermionic_diff(j).equals(dg.mul_left(g.fermionic_diff(j))), trial


def test_dirac_of_heaviside_is_delta_layer():
    """The Dirac operator turns H(g) into (d_x g) delta(g)."""
    rng = np.random.default_rng(56)
    for trial in range(8):
        ctx = _CTXS[trial % len(_CTXS)]
        g = _rand_even_phase(ctx, rng)
        lhs = expand_heaviside(ctx, g).dirac_left()
        rhs = expand_delta(ctx, g).mul_left(dirac_left(ctx, g))
        assert lhs.equals(rhs), trial


# ---------------------------------------------------------------------------
# arithmetic
# ---------------------------------------------------------------------------


def test_expansion_arithmetic_round_trip():
    ctx = SuperContext(2, 1)
    g = parse_superfunction(ctx, "x1 + q1*q2")
    a = expand_delta(ctx, g)
    b = expand_heaviside(ctx, g).mul_left(parse_superfunction(ctx, "x2"))
    s = a + b
    assert (s - b).equals(a)
    assert (-(-s)).equals(s)


def test_smooth_factors_multiply_from_both_sides():
    ctx = SuperContext(2, 1)
    g = parse_superfunction(ctx, "x1 + q1*q2")
    d = expand_delta(ctx, g)
    f = parse_superfunction(ctx, "3*x2")
    smooth = DistributionExpansion.from_smooth(ctx, f)
    assert (smooth * d).equals(d.mul_left(f))
    assert (d * smooth).equals(d.mul_right(f))


def test_product_of_two_singular_expansions_is_refused():
    ctx = SuperContext(2, 1)
    g = parse_superfunction(ctx, "x1 + q1*q2")
    with pytest.raises(DistributionError):
        expand_delta(ctx, g) * expand_heaviside(ctx, g)


def test_equals_distinguishes_phases():
    ctx = SuperContext(2, 1)
    d1 = expand_delta(ctx, parse_superfunction(ctx, "x1"))
    d2 = expand_delta(ctx, parse_superfunction(ctx, "x2"))
    assert not d1.equals(d2)
