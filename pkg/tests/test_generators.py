from fractions import Fraction

import pytest

from shufflehall.exactalg import LaurentPoly, ParamScalar
from shufflehall.generators import (
    EpsilonVector,
    WordExpression,
    alpha,
    build_P,
    build_P_literal,
    build_P_recursive,
    build_theta_Q,
    build_X,
    build_X_eps,
    empty_triangle_candidates,
    literal_m_vectors,
    word_to_element,
)
from shufflehall.shuffle_core import (
    bracket,
    is_minimal,
    make_element,
    shuffle_mul,
    slope_at_most,
    wheel_check,
    xi_profile,
)


def zpow(d):
    return make_element(1, LaurentPoly.z_var(0, 1, d))


def test_alpha_against_commutator_constant():
    # q * alpha(1) equals the constant in the weight-two commutator numerator
    q = ParamScalar.q_power(1)
    q1 = ParamScalar.q1_power(1)
    q2 = ParamScalar.q2_power(1)
    assert q * alpha(1) == (q - 1) * (q1 - 1) * (1 - q2)


def test_build_X_base_cases():
    assert build_X((5,)) == zpow(5)
    assert build_X((-2,)) == zpow(-2)
    x01 = build_X((0, 1))
    q = LaurentPoly.param(1, 2, 1).embed(2)
    one = LaurentPoly.const(1, 2)
    z1 = LaurentPoly.z_var(0, 2)
    z2 = LaurentPoly.z_var(1, 2)
    assert x01.num == (q - one) * z1 * z2 * (z1 + z2)
    assert (x01.k, x01.d) == (2, 1)


def test_build_X_satisfies_wheel():
    x = build_X((1, 0, 1))
    assert wheel_check(x.num, 3)
    assert make_element(3, x.num, x.den) == x


def test_epsilon_vector_sums():
    e = EpsilonVector(1, 1, 2, "0")
    assert e.m_vector() == (1, 1)
    assert EpsilonVector(1, 1, 2, "1").m_vector() == (0, 2)
    assert EpsilonVector(2, 1, 1, "").m_vector() == (0, 1)
    s = EpsilonVector(1, 2, 3, "10").prefix_sums()
    assert s[0] == 0 and s[-1] == 6
    assert EpsilonVector(1, 0, 3, "11").m_vector() == (-1, 0, 1)
    with pytest.raises(ValueError):
        EpsilonVector(2, 4, 2, "0")
    with pytest.raises(ValueError):
        EpsilonVector(1, 1, 3, "0")


def test_build_X_eps_matches_staircase():
    assert build_X_eps(EpsilonVector(1, 1, 2, "0")) == build_X((1, 1))
    assert build_X_eps(EpsilonVector(1, 1, 2, "1")) == build_X((0, 2))


def test_build_P_weight_one():
    for d in range(-2, 4):
        assert build_P(1, d) == zpow(d)


def test_build_P_21_equals_commutator():
    assert build_P(2, 1) == bracket(zpow(1), zpow(0))


def test_build_P_literal_cross_check():
    for k, d in [(1, 3), (2, 1), (2, 0), (2, 2), (3, 1), (3, 2), (3, 0)]:
        n = len(literal_m_vectors(k, d))
        eps_vectors = [
            EpsilonVector(k // n, d // n, n, "0" * (n - 1 - s) + "1" * s).m_vector()
            for s in range(n)
        ]
        assert literal_m_vectors(k, d) == eps_vectors
        assert build_P_literal(k, d) == build_P(k, d)


def test_build_P_minimality_spot_checks():
    for k, d in [(2, 1), (2, -1), (3, 1), (3, 2)]:
        p = build_P(k, d)
        assert (p.k, p.d) == (k, d)
        assert is_minimal(p)
    assert xi_profile(build_P(2, 1)) == [0, 0, 1]


def test_X_eps_slope_bound():
    for bits in ("00", "01", "10", "11"):
        x = build_X_eps(EpsilonVector(1, 1, 3, bits))
        assert slope_at_most(x, 1)
        assert slope_at_most(x, Fraction(3, 2))


def test_empty_triangle_candidates_frozen():
    assert empty_triangle_candidates(3, 1) == [((2, 1), (1, 0))]
    assert empty_triangle_candidates(2, 0) == [((1, 1), (1, -1))]
    assert empty_triangle_candidates(4, 2) == [((3, 2), (1, 0)), ((1, 1), (3, 1))]
    for (k1, d1), (k2, d2) in empty_triangle_candidates(5, 2):
        assert (k1 + k2, d1 + d2) == (5, 2)
        assert k2 * d1 - k1 * d2 == 1


def test_recursive_weight_two():
    word, elem = build_P_recursive(2, 1)
    assert elem == build_P(2, 1)
    one = ParamScalar.from_value(1)
    assert word == WordExpression({(1, 0): one, (0, 1): -one})
    assert word.to_element() == elem


def test_recursive_gcd_two():
    word, elem = build_P_recursive(2, 0)
    assert elem == build_P(2, 0)
    assert word.to_element() == elem


def test_recursive_weight_three():
    word, elem = build_P_recursive(3, 1)
    assert elem == build_P(3, 1)
    assert word.to_element() == elem


def test_recursive_triangle_rank_agreement():
    a = build_P_recursive(4, 2, triangle_rank=0)[1]
    b = build_P_recursive(4, 2, triangle_rank=1)[1]
    assert a == b
    assert a.serialize() == b.serialize()


def test_theta_ray_one_zero():
    thetas, qs = build_theta_Q(1, 0, 2)
    p1 = build_P(1, 0)
    assert thetas[0] == p1.scale(alpha(1))
    expected = build_P(2, 0).scale(alpha(2)) + shuffle_mul(p1, p1).scale(
        alpha(1) * alpha(1) * ParamScalar.from_value(Fraction(1, 2))
    )
    assert thetas[1] == expected
    assert qs[1] == thetas[1]


def test_word_to_element_concat():
    w = WordExpression.from_word((1, 0)).concat(WordExpression.from_word((2,)))
    assert w == WordExpression.from_word((1, 0, 2))
    assert word_to_element((1, 0, 2)) == shuffle_mul(
        shuffle_mul(zpow(1), zpow(0)), zpow(2)
    )
