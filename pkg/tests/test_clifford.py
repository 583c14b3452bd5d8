"""Mixed Clifford algebra: orthogonal units, symplectic units, Dirac operator."""

import math
from fractions import Fraction

import numpy as np
import pytest

import superint.expr as ex
from superint import (SuperContext, dirac_left, dirac_right, laplacian_mce,
                      parse_superfunction, supervector, vector_modulus)
from superint.clifford import (CliffordError, MixedCliffordElement,
                               eblade_mul, scalar_word, word_mul, word_string)


@pytest.fixture
def ctx():
    return SuperContext(3, 1)


# ---------------------------------------------------------------- the units

def test_orthogonal_units_anticommute_and_square_to_minus_one(ctx):
    e1 = MixedCliffordElement.e_unit(ctx, 1)
    e2 = MixedCliffordElement.e_unit(ctx, 2)
    one = MixedCliffordElement.from_superfunction(ctx, ctx.one())
    assert (e1 * e1 + one).is_zero()
    assert (e1 * e2 + e2 * e1).is_zero()


def test_symplectic_units_commutator(ctx):
    # eh_j eh_k - eh_k eh_j is scalar-valued with the symplectic pairing:
    # the (1,2) pair gives opposite signs on swap, diagonal commutators vanish
    h1 = MixedCliffordElement.eh_unit(ctx, 1)
    h2 = MixedCliffordElement.eh_unit(ctx, 2)
    c12 = h1 * h2 - h2 * h1
    c21 = h2 * h1 - h1 * h2
    assert c12.is_scalar() and not c12.is_zero()
    assert (c12 + c21).is_zero()
    assert (h1 * h1 - h1 * h1).is_zero()


def test_blade_word_products_associative():
    ctx = SuperContext(2, 2)
    rng = np.random.default_rng(31)
    units = [MixedCliffordElement.e_unit(ctx, j) for j in (1, 2)]
    units += [MixedCliffordElement.eh_unit(ctx, j) for j in (1, 2, 3, 4)]
    for _ in range(30):
        a, b, c = (units[int(rng.integers(0, 6))] for _ in range(3))
        assert ((a * b) * c - a * (b * c)).is_zero()


def test_eblade_mul_signs():
    # e1 * e1 -> -1 empty blade; e2 * e1 -> -e1e2
    sign, mask = eblade_mul(0b01, 0b01)
    assert (sign, mask) == (-1, 0)
    sign, mask = eblade_mul(0b10, 0b01)
    assert (sign, mask) == (-1, 0b11)


def test_word_string(ctx):
    w = scalar_word(ctx.n)
    assert word_string(ctx.m, w) == "1"


# ---------------------------------------------------------------- Dirac ops

def test_dirac_of_supervector_is_superdimension():
    # applying the Dirac operator to x returns the scalar M = m - 2n
    for (m, n) in [(2, 0), (3, 1), (2, 2), (4, 1), (5, 2)]:
        ctx = SuperContext(m, n)
        out = dirac_left(ctx, supervector(ctx))
        M = m - 2 * n
        assert out.is_scalar()
        assert out.scalar_part().nf_equals(ctx.scalar(ex.const(M)))


def test_dirac_squared_is_laplacian(ctx):
    F = parse_superfunction(ctx, "x1^2*x2 + x3*q1*q2 + x2*x3^3")
    twice = dirac_left(ctx, dirac_left(ctx, F))
    lap = laplacian_mce(ctx, F)
    scal = scalar_word(ctx.n)
    # off-scalar words only survive as unrewritten zeros (x1 - x1 style)
    for w in set(twice.words()) | set(lap.words()):
        assert twice[w].nf_equals(lap[w])
        if w != scal:
            assert twice[w].nf_equals(ctx.zero())
    assert twice[scal].nf_equals(F.laplacian())


def test_dirac_left_right_agree_on_even(ctx):
    F = parse_superfunction(ctx, "x1*x2 + x3^2 + x1*q1*q2")
    assert F.is_even()
    left = dirac_left(ctx, F)
    right = dirac_right(ctx, F)
    words = set(left.words()) | set(right.words())
    for w in words:
        assert left[w].nf_equals(right[w])


def test_dirac_of_ball_phase(ctx):
    # d_x [x^2] = 2x, so the ball phase -x^2 - R^2 maps to -2x
    phase = -(ctx.x_squared()) - 1
    grad = dirac_left(ctx, phase)
    want = supervector(ctx).scale(ex.const(-2))
    for w in set(grad.words()) | set(want.words()):
        assert grad[w].equals(want[w], tol=1e-12)


# ---------------------------------------------------------------- modulus

def test_vector_modulus_of_ball_gradient(ctx):
    # |2x| = 2|x|; the square of the gradient only vanishes off the scalar
    # word after rewriting, so this also guards the pruning step (regression)
    phase = -(ctx.x_squared()) - 1
    grad = dirac_left(ctx, phase)
    mod = vector_modulus(grad)
    want = ctx.modulus().scale(ex.const(2))
    assert mod.equals(want, tol=1e-11)


def test_vector_modulus_rejects_non_vector(ctx):
    not_vector = MixedCliffordElement.from_superfunction(ctx, ctx.one()) \
        + MixedCliffordElement.e_unit(ctx, 1)
    with pytest.raises(CliffordError):
        vector_modulus(not_vector)


def test_modulus_scaling_by_constants():
    ctx = SuperContext(2, 1)
    v = supervector(ctx).scale(ex.const(Fraction(5)))
    mod = vector_modulus(v)
    want = ctx.modulus().scale(ex.const(5))
    assert mod.equals(want, tol=1e-11)


# ---------------------------------------------------------------- mixed sums

def test_coefficient_arithmetic(ctx):
    F = parse_superfunction(ctx, "x1 + q1*q2")
    A = MixedCliffordElement.from_superfunction(ctx, F)
    B = MixedCliffordElement.e_unit(ctx, 2).scale(ex.var(3))
    s = A + B
    assert s.scalar_part().nf_equals(F)
    assert (s - B - A).equals(MixedCliffordElement.zero(ctx))


def test_word_mul_symplectic_normal_ordering():
    # multiplying symplectic words keeps them normal ordered and tracks the
    # scalar contractions; squaring eh1 against eh2 twice stays finite
    n = 1
    # already normal ordered: eh1 * `eh1 passes through untouched
    out = list(word_mul(1, (0, (1, 0)), (0, (0, 1))))
    assert out == [(Fraction(1), (0, (1, 1)))]
    # reordering `eh1 * eh1 costs the symplectic scalar term
    rev = list(word_mul(1, (0, (0, 1)), (0, (1, 0))))
    assert sorted(rev) == [(Fraction(-1), (0, (0, 0))),
                           (Fraction(1), (0, (1, 1)))]
    # e-blades compose by xor with a sign: e1 * e12 = -e2
    out2 = list(word_mul(0, (0b01, ()), (0b11, ())))
    assert out2 == [(Fraction(-1), (0b10, ()))]
