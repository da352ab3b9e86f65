"""Evaluation of elements at the geometric point z_i = q1^-i.

In reduced form an element is num / (den * kernel factors); multiplying by
prod_{i != j} (z_i - q1 z_j) / (z_i - z_j) cancels the whole kernel against
the squared difference product up to a reordering sign, leaving

    (+/- 1) * num / (den * prod_{i != j} (z_i - q2 z_j)),

which is regular at z_i = q1^-i.  The map multiplies the evaluated value by
a fixed prefactor in half-integer powers of q1 (integer powers of s) and is
multiplicative up to an explicit monomial twist.
"""

from .exactalg import LaurentPoly, ParamScalar, QONE, substitute
from .shuffle_core import ShuffleElement


class AccidentalPole(ArithmeticError):
    """The evaluation point hit a vanishing denominator."""


def _reordering_sign(k: int) -> int:
    # sign of rewriting prod_{i<j} (z_i - z_j)^2 as prod_{i != j} (z_i - z_j)
    sign = 1
    for _ in range(k * (k - 1) // 2):
        sign = -sign
    return sign


def phi(P: ShuffleElement) -> ParamScalar:
    """Evaluate P at z_i = q1^-i, including the normalizing prefactor."""
    point = [(QONE, -2 * (i + 1), 0, ()) for i in range(P.k)]
    return phi_value(P.k, P.d, substitute(P.num, point, 0), P.den)


def phi_value(k: int, d: int, num_value: LaurentPoly, den: LaurentPoly) -> ParamScalar:
    """Assemble the map's value from an already-evaluated numerator."""
    den_value = den
    for i in range(1, k + 1):
        for j in range(1, k + 1):
            if i == j:
                continue
            factor = LaurentPoly.param(1, -2 * i, 0) - LaurentPoly.param(1, -2 * j, 1)
            den_value = den_value * factor
    if den_value.is_zero:
        raise AccidentalPole("denominator vanishes at the evaluation point")
    value = ParamScalar.from_poly(num_value.scale(_reordering_sign(k)), den_value)
    # prefactor q1^((-k^2 + kd + d + 2k)/2) (1-q2)^-k prod (q1^(i-1)-q2)/(q1^i-1)
    prefactor = ParamScalar.from_poly(
        LaurentPoly.param(1, -k * k + k * d + d + 2 * k, 0)
    )
    one_minus_q2 = ParamScalar.from_poly(
        LaurentPoly.const(1, 0) - LaurentPoly.param(1, 0, 1)
    )
    prefactor = prefactor * one_minus_q2.inverse() ** k
    for i in range(1, k + 1):
        top = LaurentPoly.param(1, 2 * (i - 1), 0) - LaurentPoly.param(1, 0, 1)
        bottom = LaurentPoly.param(1, 2 * i, 0) - LaurentPoly.const(1, 0)
        prefactor = prefactor * ParamScalar.from_poly(top, bottom)
    return value * prefactor


def phi_twist(k: int, d: int, l: int, e: int) -> ParamScalar:
    """The monomial q1^((l d - k e)/2) relating phi of a product to the
    product of phi values."""
    return ParamScalar.from_poly(LaurentPoly.param(1, l * d - k * e, 0))


def check_phi_multiplicative(P: ShuffleElement, Q: ShuffleElement) -> bool:
    from .shuffle_core import shuffle_mul

    left = phi(shuffle_mul(P, Q))
    right = phi(P) * phi(Q) * phi_twist(P.k, P.d, Q.k, Q.d)
    return left == right


def expected_phi_generator(k: int, d: int) -> ParamScalar:
    """Closed form of phi on the degree-(k, d) generator: the inverse of
    q1^(n/2) - q1^(-n/2) at n = gcd(k, d)."""
    import math

    n = math.gcd(k, abs(d)) if (k, d) != (0, 0) else 0
    if n == 0:
        raise ValueError("undefined at the origin")
    den = LaurentPoly.param(1, n, 0) - LaurentPoly.param(1, -n, 0)
    return ParamScalar.from_poly(LaurentPoly.const(1, 0), den)


def expected_phi_staircase(eps) -> ParamScalar:
    """Closed form of phi on a staircase element: q1^(n/2 - #ones) over
    (q1-1)^k (1-q2)^(k-1), with k the weight and n the piece count."""
    n = eps.n
    ones = sum(1 for c in eps.bits if int(c) == 1)
    k = eps.k
    num = LaurentPoly.param(1, n - 2 * ones, 0)
    q1_minus_1 = LaurentPoly.param(1, 2, 0) - LaurentPoly.const(1, 0)
    one_minus_q2 = LaurentPoly.const(1, 0) - LaurentPoly.param(1, 0, 1)
    den = LaurentPoly.const(1, 0)
    for _ in range(k):
        den = den * q1_minus_1
    for _ in range(k - 1):
        den = den * one_minus_q2
    return ParamScalar.from_poly(num, den)
