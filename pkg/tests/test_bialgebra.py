"""Coproduct, normal ordering, and pairing checks with frozen expectations."""

from fractions import Fraction

import pytest

from shufflehall.exactalg import LaurentPoly, ParamScalar, PS_ONE, PS_ZERO
from shufflehall.shuffle_core import ONE, TensorElement, ZERO, shuffle_mul, tensor
from shufflehall.generators import (
    EpsilonVector,
    alpha,
    build_P,
    build_P_recursive,
    build_theta_Q,
    build_X_eps,
    word_to_element,
)
from shufflehall.bialgebra import (
    HSeriesElement,
    WindowExceeded,
    check_bialgebra_pairing,
    check_coassociativity,
    check_delta_multiplicative,
    check_expdelta,
    delta_mu,
    delta_truncated,
    gram_check,
    h_weight_series,
    hecke_check,
    normal_order,
    omega_big_series,
    omega_correction,
    omega_rational_series,
    pair_h_monomials,
    pair_word_element,
    strip_h0,
    tensor_right_slice,
    _cross_coeff,
)


def _scalar_poly(value: ParamScalar) -> LaurentPoly:
    ((exp, coeff),) = value.den.terms.items()
    assert exp == (0, 0)
    return value.num.scale(1 / coeff)


def test_cross_coeff_low_orders():
    q_inv = LaurentPoly.param(1, -2, -1)
    assert _cross_coeff(0) == q_inv
    expected1 = (
        LaurentPoly.param(1, -2, 0)
        + LaurentPoly.param(1, 0, -1)
        + LaurentPoly.param(1, 2, 1)
        - LaurentPoly.const(1, 0)
    ).shift(-2, -1)
    assert _cross_coeff(1) == expected1


def test_omega_series_matches_rational_form():
    series = omega_big_series(6)
    rational = omega_rational_series(6)
    assert series[0] == PS_ONE
    assert series[1] == PS_ZERO - alpha(1)
    for a, b in zip(series, rational):
        assert a == b


def test_omega_correction_single_variable_matches_series():
    series = omega_big_series(4)
    for r in range(1, 5):
        expected = _scalar_poly(series[r]).embed(1).shift(z_exps=[r])
        assert omega_correction(r, 1) == expected


def test_omega_correction_degree_one():
    # degree-one correction is minus the first structure constant times p_1
    got = omega_correction(1, 2)
    expected = _scalar_poly(PS_ZERO - alpha(1)).embed(2) * (
        LaurentPoly.z_var(0, 2) + LaurentPoly.z_var(1, 2)
    )
    assert got == expected


def test_normal_order_h0_and_scalars():
    P = word_to_element((2,))
    assert normal_order((0,), P, 3) == HSeriesElement(3, {((0,), ("s", 1)): P})
    assert normal_order((2,), ONE, 3) == HSeriesElement(3, {((2,), ("s", 0)): ONE})
    with pytest.raises(WindowExceeded):
        normal_order((4,), P, 3)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("d", [0, 2])
def test_hecke_commutator_on_one_variable(n, d):
    assert hecke_check(n, word_to_element((d,)), 6)


@pytest.mark.parametrize("n", [1, 2])
def test_hecke_commutator_on_two_variables(n):
    assert hecke_check(n, build_P(2, 1), 6)


def test_delta_truncated_one_variable():
    P = word_to_element((2,))
    one = LaurentPoly.const(1, 0)
    terms = {
        ((), ("t", 1, 0, 0)): TensorElement(1, 0, LaurentPoly.z_var(0, 1, 2), one, 0)
    }
    for n in range(4):
        terms[((n,), ("t", 0, 1, 0))] = TensorElement(
            0, 1, LaurentPoly.z_var(0, 1, 2 - n), one, 0
        )
    assert delta_truncated(P, 3) == HSeriesElement(3, terms)
    # a tight window drops the top split whose second factor has degree 0
    narrow = {
        ((n,), ("t", 0, 1, 0)): TensorElement(
            0, 1, LaurentPoly.z_var(0, 1, 2 - n), one, 0
        )
        for n in range(2)
    }
    assert delta_truncated(P, 1) == HSeriesElement(1, narrow)


def test_delta_mu_two_variables():
    P = build_P(2, 1)
    got = delta_mu(P, Fraction(1, 2))
    assert got[0] == tensor(ONE, P, 2)
    assert got[1] is ZERO
    assert got[2] == tensor(P, ONE, 0)


def _assert_top_slices_match(P, mu, window):
    hse = delta_truncated(P, window)
    limits = delta_mu(P, mu)
    k = P.k
    for i, lim in enumerate(limits):
        if lim is ZERO or lim.is_zero:
            continue
        m = k - i
        assert lim.h0_pow == m
        comp = hse.component((0,) * m, left_k=i)
        assert comp is not None
        right_degs = {sum(e[2 + i :]) for e in lim.joint_num.terms}
        assert len(right_degs) == 1
        d2 = right_degs.pop() - m * (m - 1)
        assert tensor_right_slice(comp, d2) == strip_h0(lim)


def test_delta_truncated_tops_agree_with_scaling_limits():
    _assert_top_slices_match(build_P(2, 1), Fraction(1, 2), 3)
    _assert_top_slices_match(
        build_X_eps(EpsilonVector(1, 1, 2, "0")), Fraction(1, 1), 3
    )


def test_primitive_part_slices():
    # weight-(1,1) split of the degree-(2,1) generator
    comp = delta_truncated(build_P(2, 1), 2).component((0,), left_k=1)
    assert comp is not None
    expected = tensor(word_to_element((1,)), word_to_element((0,)), 0).scale(alpha(1))
    assert tensor_right_slice(comp, 0) == expected
    # weight-(2,1) split of the degree-(3,1) generator
    comp3 = delta_truncated(build_P(3, 1), 2).component((0,), left_k=2)
    assert comp3 is not None
    expected3 = tensor(build_P(2, 1), word_to_element((0,)), 0).scale(alpha(1))
    assert tensor_right_slice(comp3, 0) == expected3


def test_staircase_slope_coproduct_rank_two():
    X0 = build_X_eps(EpsilonVector(1, 1, 2, "0"))
    X1 = build_X_eps(EpsilonVector(1, 1, 2, "1"))
    unit = build_X_eps(EpsilonVector(1, 1, 1, ""))
    got0 = delta_mu(X0, Fraction(1, 1))
    assert got0[0] == tensor(ONE, X0, 2)
    assert got0[1] == tensor(unit, unit, 1)
    assert got0[2] == tensor(X0, ONE, 0)
    got1 = delta_mu(X1, Fraction(1, 1))
    minus_q_inv = ParamScalar.from_value(-1) * ParamScalar.q_power(-1)
    assert got1[0] == tensor(ONE, X1, 2)
    assert got1[1] == tensor(unit, unit, 1).scale(minus_q_inv)
    assert got1[2] == tensor(X1, ONE, 0)


def test_staircase_slope_coproduct_closed_form():
    assert check_expdelta(1, 1, 2) == []


def test_grouplike_family_coproduct():
    _, qs = build_theta_Q(1, 1, 2)
    q1, q2 = qs
    got = delta_mu(q2, Fraction(1, 1))
    assert got[0] == tensor(ONE, q2, 2)
    assert got[1] == tensor(q1, q1, 1)
    assert got[2] == tensor(q2, ONE, 0)


def test_delta_is_multiplicative_within_window():
    assert check_delta_multiplicative(
        word_to_element((0,)), word_to_element((1,)), 6
    )


def test_coassociativity_small():
    assert check_coassociativity(word_to_element((2,)), 6)
    assert check_coassociativity(build_P(2, 1), 6)


def test_pair_word_with_one_variable_elements():
    inv_a1 = alpha(1).inverse()
    for d in (0, 1, 3, -2):
        assert pair_word_element((d,), word_to_element((d,))) == inv_a1
    assert pair_word_element((2,), word_to_element((3,))).is_zero


def test_pair_word_with_rank_two_generator():
    P = build_P(2, 1)
    assert pair_word_element((1, 0), P) == alpha(1).inverse()
    assert pair_word_element((0, 1), P).is_zero


def test_pairing_symmetry_small():
    pairs = [((1, 0), (0, 1)), ((2, 0), (1, 1)), ((1, 1), (2, 0))]
    for wa, wb in pairs:
        left = pair_word_element(wa, word_to_element(wb))
        right = pair_word_element(wb, word_to_element(wa))
        assert left == right
    wa, wb = (1, 0, 0), (0, 1, 0)
    assert pair_word_element(wa, word_to_element(wb)) == pair_word_element(
        wb, word_to_element(wa)
    )


def test_h_monomial_pairing():
    weights = h_weight_series(4)
    for n in range(1, 5):
        assert pair_h_monomials((n,), (n,)) == weights[n]
    assert pair_h_monomials((1,), (1,)) == alpha(1)
    assert pair_h_monomials((1, 1), (2,)) == alpha(1) ** 2
    assert pair_h_monomials((1,), (2,)).is_zero
    # grouplike markers are transparent on either side
    assert pair_h_monomials((0, 1), (1,)) == alpha(1)
    assert pair_h_monomials((2,), (0, 0, 2)) == weights[2]


def test_pairing_intertwines_product_and_coproduct():
    cases = [
        ((1,), (0,), (1, 0)),
        ((1,), (0,), (0, 1)),
        ((0,), (0,), (0, 0)),
        ((2,), (1,), (2, 1)),
    ]
    for wa, wb, wc in cases:
        assert check_bialgebra_pairing(wa, wb, wc, 6)


def test_pairing_intertwines_len_three():
    assert check_bialgebra_pairing((1, 0), (2,), (2, 1, 0), 6)


def test_gram_matrix_small():
    report = gram_check([((2, 0),), ((1, 0), (1, 0))])
    assert report["ok"], report["entries"]
    report = gram_check([((2, 1),), ((1, 0), (1, 1))])
    assert report["ok"], report["entries"]


def _null_vector(rows, n):
    """One kernel vector of the column span, over the parameter field."""
    rows = [list(r) for r in rows]
    piv = {}
    r = 0
    free = None
    for c in range(n):
        pr = next((i for i in range(r, len(rows)) if not rows[i][c].is_zero), None)
        if pr is None:
            free = c
            break
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = rows[r][c].inverse()
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and not rows[i][c].is_zero:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        piv[c] = r
        r += 1
    if free is None:
        return None
    vec = [PS_ZERO] * n
    vec[free] = PS_ONE
    for c, ri in piv.items():
        vec[c] = PS_ZERO - rows[ri][free]
    return vec


def _z_coordinates(element):
    coords = {}
    for (s_e, q2_e, *z), coeff in element.num.terms.items():
        block = coords.setdefault(tuple(z), LaurentPoly.zero(0))
        coords[tuple(z)] = block + LaurentPoly.param(coeff, s_e, q2_e)
    return coords


def test_pairing_respects_linear_relations():
    # the word (1,-1) decomposes over the slope-bounded collection basis at
    # total degree (2,0); both word forms must pair alike on the right
    from shufflehall.hall_geometry import collection_product
    from shufflehall.bialgebra import collection_word
    from shufflehall.generators import WordExpression

    collections = [((2, 0),), ((1, 0), (1, 0)), ((1, 1), (1, -1))]
    words = [collection_word(c) for c in collections]
    words.append(WordExpression.from_word((1, -1)))
    elements = [collection_product(c) for c in collections]
    elements.append(word_to_element((1, -1)))
    coords = [_z_coordinates(el) for el in elements]
    keys = sorted({z for c in coords for z in c})
    rows = [
        [
            ParamScalar.from_poly(c.get(key, LaurentPoly.zero(0)), el.den)
            for c, el in zip(coords, elements)
        ]
        for key in keys
    ]
    combo = _null_vector(rows, len(elements))
    assert combo is not None
    assert not combo[-1].is_zero
    merged = None
    for c, el in zip(combo, elements):
        part = el.scale(c)
        merged = part if merged is None else merged + part
    assert merged.is_zero
    for target in (build_P(2, 0), word_to_element((0, 0))):
        acc = PS_ZERO
        for c, w in zip(combo, words):
            acc = acc + c * pair_word_element(w, target)
        assert acc.is_zero


def test_gram_uses_recursive_words():
    word, element = build_P_recursive(2, 1)
    assert pair_word_element(word, element) == alpha(1).inverse()
