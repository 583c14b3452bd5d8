"""Superfunctions: Grassmann-valued coefficients, parsing, analytic calculus."""

import math
from fractions import Fraction

import numpy as np
import pytest

import superint.expr as ex
from superint import SuperContext, SuperFunction, parse_superfunction
from superint.superfun import SuperFunctionError


@pytest.fixture
def ctx31():
    return SuperContext(3, 1)


@pytest.fixture
def ctx22():
    return SuperContext(2, 2)


# ---------------------------------------------------------------- structure

def test_coordinate_and_generator(ctx31):
    x2 = ctx31.coordinate(2)
    assert ex.exprs_equal(x2.body, ex.var(2))
    q1 = ctx31.generator(1)
    assert q1.is_odd() and not q1.is_even()
    with pytest.raises(SuperFunctionError):
        ctx31.generator(3)  # only q1, q2 exist for n = 1


def test_x_squared_structure(ctx22):
    # x^2 = -|x|_bos^2 + (q1q2 + q3q4), and the hat version drops the last
    # bosonic coordinate: hat(x)^2 = x^2 + x_m^2
    xs = ctx22.x_squared()
    assert ex.exprs_equal(xs.body, ex.parse("-(x1^2) - x2^2"))
    assert xs[0b0011] is not None and xs.is_even()
    diff = ctx22.hat_squared() - (ctx22.x_squared() + ctx22.coordinate(2) ** 2)
    assert diff.nf_equals(ctx22.zero())


def test_fermionic_square_strictly_nilpotent(ctx22):
    s = ctx22.fermionic_square()
    assert (s ** 3).is_zero()
    assert not (s ** 2).is_zero()


def test_product_parity_bookkeeping(ctx22):
    q1, q3 = ctx22.generator(1), ctx22.generator(3)
    assert (q1 * q3 + q3 * q1).is_zero()
    assert (q1 * q1).is_zero()
    even = q1 * q3
    assert even.is_even()


def test_multiplication_sign_regression(ctx22):
    # q2 * q1 must pick up the swap sign relative to q1 * q2
    q1, q2 = ctx22.generator(1), ctx22.generator(2)
    assert ((q2 * q1) + (q1 * q2)).is_zero()


# ---------------------------------------------------------------- parsing

def test_parse_mixed_terms(ctx31):
    f = parse_superfunction(ctx31, "x1 + x2*q1*q2 + 3")
    assert ex.evaluate(f.body, {1: 2.0, 2: 0.0, 3: 0.0}) == 5.0
    assert ex.exprs_equal(f[0b11], ex.var(2))


def test_parse_builtins(ctx31):
    # X2 is the supervector square, ABSX = (-X2)^(1/2) with its nilpotent tail
    f = parse_superfunction(ctx31, "-(X2) - 1")
    assert ex.exprs_equal(f.body, ex.parse("x1^2 + x2^2 + x3^2 - 1"))
    g = parse_superfunction(ctx31, "ABSX")
    env = {1: 0.6, 2: 0.0, 3: 0.8}
    assert ex.evaluate(g.body, env) == pytest.approx(1.0, rel=1e-14)
    # soul coefficient of |x| is -1/(2|x|)
    assert ex.evaluate(g[0b11], env) == pytest.approx(-0.5, rel=1e-14)


def test_parse_params_substitution(ctx31):
    f = parse_superfunction(ctx31, "R^2 - x1^2", params={"R": 2.0})
    assert ex.evaluate(f.body, {1: 1.0, 2: 0.0, 3: 0.0}) == 3.0


def test_parse_rejects_odd_arguments_to_functions(ctx31):
    with pytest.raises((SuperFunctionError, ex.ExprError)):
        parse_superfunction(ctx31, "exp(q1)")


def test_parse_rejects_unknown_generator(ctx31):
    with pytest.raises((SuperFunctionError, ex.ExprError, ValueError)):
        parse_superfunction(ctx31, "q5")


# ---------------------------------------------------------------- calculus

def test_fermionic_diff_leibniz_with_star(ctx22):
    rng = np.random.default_rng(12)
    texts = ["x1 + x2*q1*q2 + q1*q3", "x2 - q2*q4 + x1*q3*q4",
             "1 + q1*q2*q3*q4", "x1*x2 + x1*q1*q4"]
    for _ in range(10):
        F = parse_superfunction(ctx22, texts[int(rng.integers(0, 4))])
        G = parse_superfunction(ctx22, texts[int(rng.integers(0, 4))])
        for k in (1, 2, 3, 4):
            lhs = (F * G).fermionic_diff(k)
            rhs = F.fermionic_diff(k) * G + F.star() * G.fermionic_diff(k)
            assert lhs.nf_equals(rhs)


def test_star_involution_and_parity_signs(ctx22):
    F = parse_superfunction(ctx22, "x1 + x2*q1*q2 + q1*q3 + 3*q1*q2*q3*q4")
    assert F.star().star().nf_equals(F)
    # star flips the sign of odd words only
    q1 = ctx22.generator(1)
    assert (q1.star() + q1).is_zero()
    even = parse_superfunction(ctx22, "x1 + q1*q2")
    assert even.star().nf_equals(even)


def test_left_and_right_fermionic_derivatives(ctx22):
    F = parse_superfunction(ctx22, "x1 + x2*q1*q2 + q1*q3")
    for k in (1, 2, 3, 4):
        lhs = F.fermionic_diff(k)
        rhs = F.star().fermionic_rdiff(k).scale(-1)
        assert lhs.nf_equals(rhs)


def test_bosonic_diff(ctx31):
    F = parse_superfunction(ctx31, "x1^2*x3 + x1*q1*q2")
    d = F.bosonic_diff(1)
    assert ex.exprs_equal(d.body, ex.parse("2*x1*x3"))
    assert ex.exprs_equal(d[0b11], ex.ONE)


def test_laplacian_of_x_squared_is_twice_superdimension():
    for (m, n) in [(2, 0), (3, 1), (2, 2), (5, 2)]:
        ctx = SuperContext(m, n)
        lap = ctx.x_squared().laplacian()
        M = m - 2 * n
        assert lap.nf_equals(ctx.scalar(ex.const(2 * M)))


def test_laplacian_mixed_polynomial(ctx31):
    # Delta = 4 d_{q1} d_{q2} - sum_j d_{x_j}^2 on (3, 1): the bosonic block
    # contributes -2*x2, the fermionic block 4*x3*d_{q1}d_{q2}(q1 q2) = -4*x3
    F = parse_superfunction(ctx31, "x1^2*x2 + x3*q1*q2")
    lap = F.laplacian()
    assert ex.exprs_equal(lap.body, ex.parse("-2*x2 - 4*x3"))
    assert lap.soul().is_zero()


# ------------------------------------------------------- analytic composition

def test_compose_exp_splits_body_and_soul(ctx22):
    # f(b + s) = sum_k f^(k)(b) s^k / k! for nilpotent s
    F = parse_superfunction(ctx22, "x1 + q1*q2 + q3*q4")
    E = F.compose("exp")
    env = {1: 0.7, 2: 0.0}
    eb = math.exp(0.7)
    assert ex.evaluate(E.body, env) == pytest.approx(eb, rel=1e-14)
    assert ex.evaluate(E[0b0011], env) == pytest.approx(eb, rel=1e-14)
    # top blade: e^b * (s^2/2 coefficient) with s^2 = 2 q1q2q3q4
    assert ex.evaluate(E[0b1111], env) == pytest.approx(eb, rel=1e-14)


def test_power_of_even_superfunction(ctx31):
    F = -(ctx31.x_squared())  # |x|^2 including the fermionic correction
    half = F.power(Fraction(1, 2))
    assert (half * half).equals(F, tol=1e-11)


def test_power_integer_matches_repeated_product(ctx22):
    F = parse_superfunction(ctx22, "1 + x1 + q1*q2")
    assert (F ** 3).nf_equals(F * F * F)


def test_inverse(ctx31):
    F = parse_superfunction(ctx31, "2 + x1^2 + q1*q2")
    inv = F.inverse()
    assert (F * inv).equals(ctx31.one(), tol=1e-11)


def test_modulus_homogeneity(ctx31):
    # |a x| = |a| |x| for scalar a, checked by sampling both sides
    ax = ctx31.modulus()
    scaled = (ctx31.x_squared().scale(ex.const(Fraction(9)))).scale(-1).power(Fraction(1, 2))
    want = ax.scale(ex.const(3))
    assert scaled.equals(want, tol=1e-11)


def test_evaluate_returns_grassmann_element(ctx22):
    F = parse_superfunction(ctx22, "x1 + x2*q1*q2")
    g = F.evaluate({1: 2.0, 2: 3.0})
    assert g.body == 2.0
    assert g[0b0011] == 3.0


def test_equals_tolerates_float_noise(ctx31):
    F = parse_superfunction(ctx31, "x1 + q1*q2")
    G = F + ctx31.scalar(ex.const(1e-15))
    assert F.equals(G, tol=1e-12)
    assert not F.equals(G, tol=1e-18)
