"""Ribbon-string symmetric functions and their bridge to staircase elements.

A ribbon descriptor is a binary string: the empty string has degree one and
a string of length n - 1 has degree n.  Products concatenate the factors
through a junction bit, power sums expand as alternating hook combinations,
and the bridge sends a descriptor to its staircase element on a chosen ray,
weighted by one factor of -q per one-bit.  Heavy-weight instances of the
bridge identities are delegated to the native engine.
"""

import math

from .exactalg import LaurentPoly, ParamScalar
from .generators import EpsilonVector, _p_prefactor, build_P, build_X_eps
from .shuffle_core import ShuffleElement, shuffle_mul
from . import accel, heavy

PS_ONE = ParamScalar.from_value(1)
PS_MINUS_Q = -ParamScalar.q_power(1)


def _check_descriptor(bits: str):
    if set(bits) - {"0", "1"}:
        raise ValueError(f"descriptor {bits!r} must be a binary string")


class RibbonExpr:
    """Linear combination of equal-degree ribbon descriptors with parameter
    coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict):
        clean = {}
        for bits, coeff in terms.items():
            _check_descriptor(bits)
            if not coeff.is_zero:
                clean[bits] = coeff
        if len({len(b) for b in clean}) > 1:
            raise ValueError("mixed-degree ribbon expression")
        self.terms = clean

    @staticmethod
    def zero() -> "RibbonExpr":
        return RibbonExpr({})

    @staticmethod
    def from_string(bits: str, coeff: ParamScalar = PS_ONE) -> "RibbonExpr":
        return RibbonExpr({bits: coeff})

    @property
    def degree(self):
        """Common degree of the terms, or None for the zero expression."""
        for b in self.terms:
            return len(b) + 1
        return None

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "RibbonExpr") -> "RibbonExpr":
        acc = dict(self.terms)
        for b, c in other.terms.items():
            acc[b] = acc.get(b, ParamScalar.from_value(0)) + c
        return RibbonExpr(acc)

    def __neg__(self) -> "RibbonExpr":
        return RibbonExpr({b: -c for b, c in self.terms.items()})

    def __sub__(self, other: "RibbonExpr") -> "RibbonExpr":
        return self + (-other)

    def scale(self, coeff: ParamScalar) -> "RibbonExpr":
        return RibbonExpr({b: c * coeff for b, c in self.terms.items()})

    def __mul__(self, other: "RibbonExpr") -> "RibbonExpr":
        acc = RibbonExpr.zero()
        for b1, c1 in self.terms.items():
            for b2, c2 in other.terms.items():
                acc = acc + ribbon_mul(b1, b2).scale(c1 * c2)
        return acc

    def __eq__(self, other) -> bool:
        return isinstance(other, RibbonExpr) and (self - other).is_zero

    def __hash__(self):  # pragma: no cover
        raise TypeError("unhashable")

    def canonical_text(self) -> str:
        if not self.terms:
            return "0"
        parts = [f"({c.canonical_text()})*s[{b}]" for b, c in sorted(self.terms.items())]
        return " + ".join(parts)

    def __repr__(self):  # pragma: no cover
        return f"RibbonExpr({self.canonical_text()})"


def ribbon_mul(bits1: str, bits2: str) -> RibbonExpr:
    """Two-term concatenation rule for a product of single ribbons."""
    _check_descriptor(bits1)
    _check_descriptor(bits2)
    return RibbonExpr({bits1 + "0" + bits2: PS_ONE, bits1 + "1" + bits2: PS_ONE})


def hook_powersum(n: int) -> RibbonExpr:
    """Degree-n power sum as the alternating combination of hook ribbons."""
    if n < 1:
        raise ValueError("power sums start at degree one")
    terms = {}
    for r in range(n):
        terms["0" * (n - 1 - r) + "1" * r] = ParamScalar.from_value((-1) ** (n - 1 - r))
    return RibbonExpr(terms)


def bridge_image(expr: RibbonExpr, a: int, b: int) -> ShuffleElement:
    """Image of a ribbon expression on the ray through (a, b): each
    descriptor maps to its staircase element times (-q) per one-bit."""
    if expr.is_zero:
        raise ValueError("the zero expression has no fixed weight")
    n = expr.degree
    total = None
    for bits, coeff in sorted(expr.terms.items()):
        ones = bits.count("1")
        x = build_X_eps(EpsilonVector(a, b, n, bits))
        x = x.scale(coeff * PS_MINUS_Q**ones if ones else coeff)
        total = x if total is None else total + x
    return total


def hook_constant(a: int, b: int, n: int) -> ParamScalar:
    """Scalar relating the bridged power sum to the closed-form generator."""
    k = n * a
    q1n = ParamScalar.q1_power(n)
    q2n = ParamScalar.q2_power(n)
    sign = ParamScalar.from_value((-1) ** (n - 1))
    num = (q1n - PS_ONE) * (PS_ONE - q2n)
    den = (ParamScalar.q1_power(1) - PS_ONE) ** k * (PS_ONE - ParamScalar.q2_power(1)) ** k
    return sign * num / den


def _intertwining_holds(e1: EpsilonVector, e2: EpsilonVector) -> bool:
    k = e1.k + e2.k
    if k > 5 and accel.usable(k):
        return heavy.check_concat_native(e1, e2)
    lhs = shuffle_mul(build_X_eps(e1), build_X_eps(e2))
    j0 = build_X_eps(EpsilonVector(e1.a, e1.b, e1.n + e2.n, e1.bits + "0" + e2.bits))
    j1 = build_X_eps(EpsilonVector(e1.a, e1.b, e1.n + e2.n, e1.bits + "1" + e2.bits))
    return (lhs - (j0 - j1.scale(ParamScalar.q_power(1)))).is_zero


def _hook_image_holds(a: int, b: int, n: int) -> bool:
    k = n * a
    if k > 5 and accel.usable(k):
        # compare against the staircase expansion of the generator, with the
        # denominator of the combining scalar cleared
        scalar = hook_constant(a, b, n) * _p_prefactor(k, n)
        clear = ParamScalar.from_poly(scalar.den)
        lead = ParamScalar.from_poly(scalar.num)
        unit = LaurentPoly.const(1, 0)
        weights = []
        for r in range(n):
            hook = ParamScalar.from_value((-1) ** (n - 1 - r)) * PS_MINUS_Q**r
            w = hook * clear - lead * ParamScalar.q_power(r)
            if w.den != unit:
                raise ArithmeticError("cleared weight kept a denominator")
            weights.append(w.num)
        return heavy.staircase_combo_is_zero(a, b, n, weights)
    lhs = bridge_image(hook_powersum(n), a, b)
    rhs = build_P(n * a, n * b).scale(hook_constant(a, b, n))
    return (lhs - rhs).is_zero


def check_visa(a: int, b: int, n_max: int) -> list:
    """Verify the bridge on the (a, b) ray up to total degree n_max.

    Returns a report of failed identities; an empty list means every check
    passed.  Covers product intertwining for all descriptor pairs with total
    degree at most n_max, and the power-sum image for each n <= n_max.
    """
    if a < 1 or math.gcd(a, b) != 1:
        raise ValueError(f"({a},{b}) is not a primitive ray")
    failures = []
    for n1 in range(1, n_max):
        for n2 in range(1, n_max - n1 + 1):
            for p1 in range(1 << (n1 - 1)):
                for p2 in range(1 << (n2 - 1)):
                    bits1 = format(p1, f"0{n1 - 1}b") if n1 > 1 else ""
                    bits2 = format(p2, f"0{n2 - 1}b") if n2 > 1 else ""
                    e1 = EpsilonVector(a, b, n1, bits1)
                    e2 = EpsilonVector(a, b, n2, bits2)
                    if not _intertwining_holds(e1, e2):
                        failures.append(
                            f"product intertwining s[{bits1}]*s[{bits2}] "
                            f"on ray ({a},{b})"
                        )
    for n in range(1, n_max + 1):
        if not _hook_image_holds(a, b, n):
            failures.append(f"power sum image at degree {n} on ray ({a},{b})")
    return failures
