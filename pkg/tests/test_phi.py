import math

import pytest

from shufflehall.exactalg import LaurentPoly, ParamScalar
from shufflehall.generators import (
    EpsilonVector,
    alpha,
    build_P,
    build_theta_Q,
    build_X_eps,
    word_to_element,
)
from shufflehall.phi_map import (
    check_phi_multiplicative,
    expected_phi_generator,
    expected_phi_staircase,
    phi,
    phi_twist,
)
from shufflehall.shuffle_core import shuffle_mul


def s_power(n):
    return ParamScalar.from_poly(LaurentPoly.param(1, n, 0))


def test_phi_on_rank_one_generators():
    expected = expected_phi_generator(1, 1)
    for d in (-2, 0, 1, 3, 5):
        assert phi(build_P(1, d)) == expected


def test_phi_on_rank_two_generator():
    assert phi(build_P(2, 1)) == expected_phi_generator(2, 1)
    assert phi(build_P(2, 1)) == expected_phi_generator(1, 1)


def test_phi_generator_closed_form_includes_imprimitive_degrees():
    for k, d in [(2, 0), (2, 2), (2, -1), (3, 1), (3, 2), (3, 3), (3, -1)]:
        value = phi(build_P(k, d))
        assert value == expected_phi_generator(k, d), (k, d)
        n = math.gcd(k, abs(d))
        den = LaurentPoly.param(1, n, 0) - LaurentPoly.param(1, -n, 0)
        assert value * ParamScalar.from_poly(den) == ParamScalar.from_value(1)


def test_phi_on_staircase_elements():
    cases = [(1, 1, 3), (2, 1, 2), (1, 2, 2)]
    for a, b, n_top in cases:
        for n in range(1, n_top + 1):
            for mask in range(1 << (n - 1)):
                bits = format(mask, "b").zfill(n - 1) if n > 1 else ""
                eps = EpsilonVector(a, b, n, bits)
                assert phi(build_X_eps(eps)) == expected_phi_staircase(eps), (
                    a,
                    b,
                    bits,
                )


def test_phi_is_multiplicative_with_twist():
    pairs = [
        (build_P(1, 1), build_P(1, 0)),
        (build_P(1, 2), build_P(2, 1)),
        (build_P(2, 1), build_P(1, -1)),
        (word_to_element((2, 0)), build_P(1, 3)),
    ]
    for P, Q in pairs:
        assert check_phi_multiplicative(P, Q), (P.k, P.d, Q.k, Q.d)


def test_phi_twist_cancels_on_collinear_pairs():
    P, Q = build_P(1, 1), build_P(2, 2)
    assert phi_twist(P.k, P.d, Q.k, Q.d) == ParamScalar.from_value(1)
    assert phi(shuffle_mul(P, Q)) == phi(P) * phi(Q)


def commutator_value(n):
    # (q2 - 1)(1/q - 1)(q1^(n/2) - q1^(-n/2)) / (1 - 1/q1)
    q2m1 = LaurentPoly.param(1, 0, 1) - LaurentPoly.const(1, 0)
    qinvm1 = LaurentPoly.param(1, -2, -1) - LaurentPoly.const(1, 0)
    snn = LaurentPoly.param(1, n, 0) - LaurentPoly.param(1, -n, 0)
    den = LaurentPoly.const(1, 0) - LaurentPoly.param(1, -2, 0)
    return ParamScalar.from_poly(q2m1 * qinvm1 * snn, den)


def test_phi_on_exponential_family_matches_commutator_chain():
    # Q at (2,1) via the triangle (1,1) + (1,0)
    Q21 = build_theta_Q(2, 1, 1)[1][0]
    lhs = phi(Q21)
    assert lhs == commutator_value(1)
    P1, P2 = build_P(1, 1), build_P(1, 0)
    bracket = phi(shuffle_mul(P1, P2)) - phi(shuffle_mul(P2, P1))
    assert lhs == alpha(1) * bracket

    # Q at (2,0) via the quasi-empty triangle (1,1) + (1,-1)
    Q20 = build_theta_Q(1, 0, 2)[1][1]
    lhs = phi(Q20)
    assert lhs == commutator_value(2)
    P1, P2 = build_P(1, 1), build_P(1, -1)
    bracket = phi(shuffle_mul(P1, P2)) - phi(shuffle_mul(P2, P1))
    assert lhs == alpha(1) * bracket


def test_phi_expected_generator_rejects_origin():
    with pytest.raises(ValueError):
        expected_phi_generator(0, 0)
