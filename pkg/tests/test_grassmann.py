"""Grassmann algebra on bitmask blades and the Berezin integral."""

import math
from fractions import Fraction

import numpy as np
import pytest

from superint.grassmann import (GrassmannAlgebra, blade_mul, blade_string,
                                popcount)


def test_generator_relations():
    alg = GrassmannAlgebra(2)  # four generators q1..q4
    for i in range(1, 5):
        qi = alg.generator(i)
        assert (qi * qi).is_zero()
        for j in range(i + 1, 5):
            qj = alg.generator(j)
            assert (qi * qj + qj * qi).is_zero()


def test_blade_mul_sign_bookkeeping():
    # q1*q2 against q3: no swaps needed past the mask, sign +1
    sign, mask = blade_mul(0b0011, 0b0100)
    assert mask == 0b0111 and sign == 1
    # q2 * q1 = -q1*q2
    sign, mask = blade_mul(0b0010, 0b0001)
    assert mask == 0b0011 and sign == -1
    # overlapping blades annihilate
    sign, mask = blade_mul(0b0011, 0b0001)
    assert sign == 0


def test_blade_mul_matches_generator_products():
    alg = GrassmannAlgebra(2)
    rng = np.random.default_rng(5)
    for _ in range(40):
        a = int(rng.integers(0, 16))
        b = int(rng.integers(0, 16))
        sign, mask = blade_mul(a, b)
        ea = alg.element({a: 1})
        eb = alg.element({b: 1})
        prod = ea * eb
        if sign == 0:
            assert prod.is_zero()
        else:
            assert prod[mask] == sign


def test_associativity_randomized():
    alg = GrassmannAlgebra(2)
    rng = np.random.default_rng(17)
    def rand_elt():
        return alg.element({int(rng.integers(0, 16)): float(rng.normal())
                            for _ in range(3)})
    for _ in range(30):
        a, b, c = rand_elt(), rand_elt(), rand_elt()
        lhs = (a * b) * c
        rhs = a * (b * c)
        assert (lhs - rhs).is_zero(tol=1e-12)


def test_grading():
    alg = GrassmannAlgebra(2)
    e = alg.blade([1, 2]) + alg.scalar(2)
    assert e.grades() == [0, 2]
    assert e.max_grade() == 2
    assert popcount(0b1011) == 3


def test_body_soul_split():
    alg = GrassmannAlgebra(1)
    e = alg.scalar(3) + alg.blade([1, 2]).scale(5)
    assert e.body == 3
    assert e.soul()[0b11] == 5
    assert e.soul()[0] == 0


def test_star_is_involution():
    alg = GrassmannAlgebra(2)
    rng = np.random.default_rng(23)
    for _ in range(20):
        e = alg.element({int(rng.integers(0, 16)): float(rng.normal())
                         for _ in range(4)})
        assert (e.star().star() - e).is_zero(tol=0)


def test_fermionic_derivative_left_linearity():
    alg = GrassmannAlgebra(2)
    q = alg.generator
    # d/dq1 (q1 q2) = q2 ; d/dq2 (q1 q2) = -q1 (q2 must hop over q1)
    e = q(1) * q(2)
    assert (e.derivative(1) - q(2)).is_zero(tol=0)
    assert (e.derivative(2) + q(1)).is_zero(tol=0)
    # right derivative from the other side
    assert (e.rderivative(2) - q(1)).is_zero(tol=0)


def test_nilpotent_powers_truncate():
    alg = GrassmannAlgebra(2)
    s = alg.blade([1, 2]) + alg.blade([3, 4])
    sq = s ** 2
    assert sq[0b1111] == 2  # q1q2q3q4 appears twice
    assert (s ** 3).is_zero()


def test_berezin_normalisation():
    # the symplectic pairing carries 1/pi per fermionic pair: the top blade
    # of n pairs integrates to pi^(-n), anything lower to zero
    for n in (1, 2, 3):
        alg = GrassmannAlgebra(n)
        top = alg.blade(list(range(1, 2 * n + 1)))
        assert top.berezin() == pytest.approx(math.pi ** (-n), rel=1e-15)
        assert alg.one().berezin() == 0.0
    alg = GrassmannAlgebra(2)
    assert alg.blade([1, 2]).berezin() == 0.0


def test_berezin_of_fermionic_square_powers():
    # (q1q2 + q3q4)^2 = 2 q1q2q3q4, so its Berezin integral is 2/pi^2
    alg = GrassmannAlgebra(2)
    s = alg.fermionic_square()
    assert (s ** 2).berezin() == pytest.approx(2.0 / math.pi ** 2, rel=1e-15)


def test_blade_string():
    assert blade_string(0) == "1"
    assert blade_string(0b101) == "q1*q3"
