"""Parity and failure-mode tests for the native polynomial engine.

Every accelerated route must agree exactly with its pure-Python twin; these
tests pin that contract on small grids and exercise the table operations
directly, including overflow, inexact division, and the resource ceiling.
"""

import random
from itertools import permutations

import pytest

from shufflehall import accel
from shufflehall.exactalg import LaurentPoly
from shufflehall.generators import _build_X_by_permutations, build_X
from shufflehall.shuffle_core import shuffle_mul

pytestmark = pytest.mark.skipif(not accel.AVAILABLE, reason="native engine not built")

_fastcore = accel._fastcore


def random_poly(var_count, seed, lo=-2, hi=3):
    rng = random.Random(seed)
    terms = {}
    for _ in range(6):
        exps = tuple(rng.randint(lo, hi) for _ in range(var_count + 2))
        terms[exps] = terms.get(exps, 0) + rng.randint(-4, 4)
    p = LaurentPoly({e: c for e, c in terms.items() if c}, var_count)
    return p


def symmetric_native(k, seed):
    rng = random.Random(seed)
    acc = _fastcore.Poly(k + 2)
    for _ in range(4):
        exps = tuple(rng.randint(0, 2) for _ in range(k))
        coeff = rng.randint(1, 5)
        head = (rng.randint(0, 1), rng.randint(0, 1))
        for perm in set(permutations(exps)):
            acc.iadd(_fastcore.Poly.from_terms(k + 2, [(head + perm, str(coeff))]))
    return acc


def test_round_trip_preserves_negative_exponents():
    for seed in range(4):
        p = random_poly(3, seed)
        assert accel.from_native(accel.to_native(p), 3) == p
    q = random_poly(2, 9, lo=0, hi=2)
    assert accel.from_native(accel.to_native(q, integral=True), 2) == q


def test_sub_and_isub_match_python_subtraction():
    for seed in range(4):
        a = random_poly(2, seed)
        b = random_poly(2, seed + 50)
        na, nb = accel.to_native(a), accel.to_native(b)
        assert accel.from_native(na.sub(nb), 2) == a - b
        na.isub(nb)
        assert accel.from_native(na, 2) == a - b


def test_swap_sub_is_transposition_minus_identity():
    for seed in range(4):
        a = random_poly(3, seed)
        na = accel.to_native(a)
        for t in range(2):
            perm = list(range(3))
            perm[t], perm[t + 1] = perm[t + 1], perm[t]
            swapped = LaurentPoly(
                {e[:2] + tuple(e[2 + i] for i in perm): c for e, c in a.terms.items()},
                3,
            )
            assert accel.from_native(na.swap_sub(t), 3) == swapped - a


def test_divexact_binomial_consume_variants():
    base = random_poly(2, 3)
    factor = LaurentPoly({(0, 0, 1, 0): 1, (2, 1, 0, 1): -1}, 2)
    product = accel.to_native(base * factor)
    keep = product.copy()
    q1 = keep.divexact_binomial(0, 1, 2, 1)
    assert keep.nterms() > 0
    q2 = product.divexact_binomial(0, 1, 2, 1, consume=True)
    assert product.nterms() == 0
    assert accel.from_native(q1, 2) == base
    assert accel.from_native(q2, 2) == base


def test_divexact_binomial_rejects_inexact():
    p = accel.to_native(random_poly(2, 11))
    with pytest.raises(ValueError):
        p.divexact_binomial(0, 1)


def test_eval_powers_matches_substitution():
    a = random_poly(3, 7)
    smults, qmults = [0, -2, -4], [1, 0, 2]
    expected = {}
    for e, c in a.terms.items():
        key = (
            e[0] + sum(m * z for m, z in zip(smults, e[2:])),
            e[1] + sum(m * z for m, z in zip(qmults, e[2:])),
        )
        expected[key] = expected.get(key, 0) + c
    expected = LaurentPoly({e: c for e, c in expected.items() if c}, 0)
    got = accel.from_native(accel.to_native(a).eval_powers(smults, qmults), 0)
    assert got == expected


def test_int64_engine_overflow_raises():
    big = _fastcore.IPoly.from_terms(2, [((0, 0), 2**62)])
    with pytest.raises(OverflowError):
        big.mul(big)


def test_term_ceiling_guard_trips_and_restores():
    assert _fastcore.get_term_ceiling() > 0
    old = _fastcore.get_term_ceiling()
    wide = _fastcore.IPoly.from_terms(2, [((i, 0), 1) for i in range(40)])
    tall = _fastcore.IPoly.from_terms(2, [((0, j), 1) for j in range(40)])
    try:
        _fastcore.set_term_ceiling(100)
        with pytest.raises(MemoryError):
            wide.mul(tall)
    finally:
        _fastcore.set_term_ceiling(old)
    assert wide.mul(tall).nterms() == 1600


@pytest.mark.parametrize(
    "m",
    [(0,), (-3,), (1, 1), (2, -1), (0, 1, 0), (-1, 2, -1), (1, 0, 2)],
)
def test_staircase_chain_matches_permutation_build(m):
    assert accel.x_chain_numerator(m) == _build_X_by_permutations(m).num


@pytest.mark.parametrize("m", [(0, 1, 0, 1), (2, -1, 0, 1)])
def test_staircase_engines_agree(m):
    rational = accel.from_native(accel.x_divided(m, rational=True), len(m))
    assert accel.x_chain_numerator(m) == rational


@pytest.mark.parametrize("m", [(1, 1), (0, 1, 0), (0, 1, 0, 1)])
def test_staircase_chain_matches_summed_oracle(m):
    k = len(m)
    total = accel.x_total(m, rational=True)
    oracle = accel.from_native(accel._vandermonde_quotient(total, k), k)
    assert accel.x_chain_numerator(m) == oracle


@pytest.mark.parametrize("split", [(1, 1), (2, 1), (1, 2), (2, 2)])
def test_product_chain_matches_summed_oracle(split):
    ka, kb = split
    na = symmetric_native(ka, 17 * ka + kb)
    nb = symmetric_native(kb, 23 * kb + ka)
    total = accel.product_total(na, nb, ka, kb)
    oracle = accel.from_native(accel._vandermonde_quotient(total, ka + kb), ka + kb)
    chain = accel.from_native(accel.product_divided(na, nb, ka, kb), ka + kb)
    assert chain == oracle


def test_shuffle_mul_matches_pure_python(monkeypatch):
    pairs = [((1,), (2,)), ((0, 1), (3,)), ((1, 1), (0, 1))]
    fast = [shuffle_mul(build_X(a), build_X(b)) for a, b in pairs]
    monkeypatch.setattr(accel, "usable", lambda k: False)
    slow = [shuffle_mul(build_X(a), build_X(b)) for a, b in pairs]
    for f, s in zip(fast, slow):
        assert f.num == s.num and f.den == s.den and f.d == s.d


def test_build_X_matches_pure_python(monkeypatch):
    ms = [(1,), (0, 1), (2, -1), (0, 1, 0)]
    fast = [build_X(m) for m in ms]
    monkeypatch.setattr(accel, "usable", lambda k: False)
    for m, f in zip(ms, fast):
        s = build_X(m)
        assert f.num == s.num and f.den == s.den and f.d == s.d
