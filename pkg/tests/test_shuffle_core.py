from fractions import Fraction

import pytest

from shufflehall.exactalg import LaurentPoly, ParamScalar, mpq
from shufflehall.shuffle_core import (
    ONE,
    ZERO,
    SlopeExceeded,
    SymmetryViolation,
    WheelViolation,
    bracket,
    is_minimal,
    make_element,
    parse_element,
    scaling_limit,
    shuffle_mul,
    slope_at_most,
    tensor,
    tensor_shuffle_mul,
    wheel_check,
    xi_profile,
)


def zpow(d):
    return make_element(1, LaurentPoly.z_var(0, 1, d))


def par(se, qe, k=2):
    return LaurentPoly.param(1, se, qe).embed(k)


def frozen_layer_two():
    """Hand-computed numerators for the three weight-two products."""
    q = par(2, 1)
    q1 = par(2, 0)
    q2 = par(0, 1)
    one = LaurentPoly.const(1, 2)
    z1 = LaurentPoly.z_var(0, 2)
    z2 = LaurentPoly.z_var(1, 2)
    pow2 = z1 * z1 + z2 * z2
    pow3 = z1 * z1 * z1 + z2 * z2 * z2
    zz = z1 * z2
    zzs = zz * (z1 + z2)
    num00 = q.scale(2) * pow2 + (q.scale(2) - one - q * q - (one + q) * (q1 + q2)) * zz
    num10 = q * pow3 + (q.scale(2) - q1 - q2 - q * q) * zzs
    num01 = q * pow3 + (q.scale(2) - one - q * (q1 + q2)) * zzs
    comm = (q - one) * (q1 - one) * (one - q2) * zzs
    return num00, num10, num01, comm


def test_weight_two_products_match_hand_computation():
    num00, num10, num01, comm = frozen_layer_two()
    one_den = LaurentPoly.const(1, 0)
    p00 = shuffle_mul(zpow(0), zpow(0))
    assert p00.num == num00 and p00.den == one_den and p00.d == 0
    p10 = shuffle_mul(zpow(1), zpow(0))
    assert p10.num == num10 and p10.d == 1
    p01 = shuffle_mul(zpow(0), zpow(1))
    assert p01.num == num01
    br = bracket(zpow(1), zpow(0))
    assert br.num == comm and br.k == 2 and br.d == 1


def test_weight_two_numeric_crosscheck():
    # independent spot check at q1=2, q2=5, (z1,z2)=(3,1)
    def ev(p, q1v, q2v, zs):
        tot = mpq(0)
        for e, c in p.terms.items():
            assert e[0] % 2 == 0
            v = c * mpq(q1v) ** (e[0] // 2) * mpq(q2v) ** e[1]
            for x, zv in zip(e[2:], zs):
                v *= mpq(zv) ** x
            tot += v
        return tot

    p00 = shuffle_mul(zpow(0), zpow(0))
    assert ev(p00.num, 2, 5, [3, 1]) == -274


def test_make_element_rejects_asymmetry():
    num = LaurentPoly.z_var(0, 2, 2)
    with pytest.raises(SymmetryViolation, match="z1 <-> z2"):
        make_element(2, num)


def test_make_element_rejects_inhomogeneous():
    num = LaurentPoly.z_var(0, 1, 2) + LaurentPoly.const(1, 1)
    with pytest.raises(ValueError, match="homogeneous"):
        make_element(1, num)


def test_wheel_rejection():
    z1 = LaurentPoly.z_var(0, 3)
    z2 = LaurentPoly.z_var(1, 3)
    z3 = LaurentPoly.z_var(2, 3)
    sq = z1 * z2 * z3
    num = sq * sq
    assert not wheel_check(num, 3)
    with pytest.raises(WheelViolation, match="q1"):
        make_element(3, num)


def test_products_satisfy_wheel_and_symmetry():
    p = shuffle_mul(shuffle_mul(zpow(1), zpow(0)), zpow(2))
    assert wheel_check(p.num, 3)
    # revalidation through make_element must accept a genuine product
    q = make_element(3, p.num, p.den)
    assert q == p and q.d == 3


def test_product_associative():
    a, b, c = zpow(0), zpow(1), zpow(2)
    left = shuffle_mul(shuffle_mul(a, b), c)
    right = shuffle_mul(a, shuffle_mul(b, c))
    assert left == right


def test_scalar_unit():
    p = shuffle_mul(zpow(1), zpow(0))
    assert shuffle_mul(ONE, p) == p
    assert shuffle_mul(p, ONE) == p


def test_xi_profile_oracles():
    assert xi_profile(zpow(3)) == [0, 3]
    p10 = shuffle_mul(zpow(1), zpow(0))
    assert xi_profile(p10) == [0, 1, 1]
    br = bracket(zpow(1), zpow(0))
    assert xi_profile(br) == [0, 0, 1]
    assert is_minimal(br)
    assert not is_minimal(p10)
    assert slope_at_most(br, Fraction(1, 2))
    assert not slope_at_most(p10, Fraction(1, 2))
    assert slope_at_most(p10, 1)


def test_scaling_limit_oracles():
    p10 = shuffle_mul(zpow(1), zpow(0))
    lim = scaling_limit(p10, 1, 1)
    assert lim == tensor(zpow(0), zpow(1), 1)
    assert lim.h0_pow == 1
    br = bracket(zpow(1), zpow(0))
    assert scaling_limit(br, 1, Fraction(1, 2)) is ZERO
    assert scaling_limit(p10, 2, 7) == tensor(p10, ONE, 0)
    assert scaling_limit(p10, 0, Fraction(1, 2)) == tensor(ONE, p10, 2)
    with pytest.raises(SlopeExceeded):
        scaling_limit(p10, 1, 0)


def test_tensor_product_componentwise():
    a, b, c, d = zpow(0), zpow(1), zpow(2), zpow(0)
    t = tensor_shuffle_mul(tensor(a, b, 1), tensor(c, d, 2))
    want = tensor(shuffle_mul(a, c), shuffle_mul(b, d), 3)
    assert t == want


def test_serialization_roundtrip_and_reduction():
    br = bracket(zpow(1), zpow(0))
    blob = br.serialize()
    assert parse_element(blob) == br
    assert parse_element(blob).serialize() == blob
    # a common parameter factor must not change the canonical form
    factor = ParamScalar.q1_power(1) - 1
    scaled = br.scale(factor).scale(factor.inverse())
    assert scaled.serialize() == blob


def test_element_degree_bookkeeping():
    p = shuffle_mul(zpow(2), zpow(-1))
    assert (p.k, p.d) == (2, 1)
    q = shuffle_mul(p, zpow(-3))
    assert (q.k, q.d) == (3, -2)
    assert wheel_check(q.num, 3)
