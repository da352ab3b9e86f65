"""Symmetric shuffle-algebra elements and the core operations on them.

An element of weight k is stored as a symmetric Laurent polynomial num in
z1..zk together with a parameter-only denominator den (a Laurent polynomial
in s, q2 alone).  The rational function it represents is

    (num / den) * prod_{i<j} (z_i - z_j)^2
                / prod_{i!=j} (z_i - q1*z_j)(z_i - q2*z_j)

with q1 = s^2 and q = q1*q2.  num must be symmetric, z-homogeneous of total
degree d + k*(k-1), and for k >= 3 it must vanish on the two wheel loci
(z1, z2, z3) = (q*w, q1*w, w) and (q*w, q2*w, w) with z4..zk free.  The
integer d is the degree of the element; the product of elements adds both
k and d.

Tensor-square elements keep one joint numerator over the concatenated
variable groups plus an integer power of the grouplike h0, which carries no
variables of its own.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from . import accel
from .exactalg import (
    LaurentPoly,
    ParamScalar,
    QONE,
    exact_div,
    mpq,
    param_gcd,
    parse_poly,
    relabel_images,
    substitute,
)


class SymmetryViolation(ValueError):
    pass


class WheelViolation(ValueError):
    pass


class SlopeExceeded(ValueError):
    pass


class Zero:
    """Sentinel for a vanishing scaling limit."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Zero"


ZERO = Zero()


# -- polynomial building blocks -------------------------------------------------


def diff_term(
    k: int, i: int, j: int, s_exp: int = 0, q2_exp: int = 0, coeff=1
) -> LaurentPoly:
    """The binomial z_{i+1} - coeff * s^s_exp * q2^q2_exp * z_{j+1}."""
    ei = [0, 0] + [0] * k
    ei[2 + i] = 1
    ej = [s_exp, q2_exp] + [0] * k
    ej[2 + j] = 1
    return LaurentPoly({tuple(ei): QONE, tuple(ej): -mpq(coeff)}, k)


def vandermonde(k: int) -> LaurentPoly:
    out = LaurentPoly.const(1, k)
    for i in range(k):
        for j in range(i + 1, k):
            out = out * diff_term(k, i, j)
    return out


def _wheel_images(k: int, q2_on_second: bool) -> list:
    """Images for (z1,z2,z3) -> (q*w, q1*w or q2*w, w), z4..zk -> free slots.

    The output has k - 2 variables: w in slot 0, then z4..zk.
    """
    out_k = k - 2
    w = [0] * out_k
    w[0] = 1
    w = tuple(w)
    images = [
        (QONE, 2, 1, w),
        (QONE, 0, 1, w) if q2_on_second else (QONE, 2, 0, w),
        (QONE, 0, 0, w),
    ]
    for j in range(3, k):
        z = [0] * out_k
        z[j - 2] = 1
        images.append((QONE, 0, 0, tuple(z)))
    return images


def is_symmetric(num: LaurentPoly) -> int | None:
    """None when symmetric, else the 0-based index i of a failing swap
    z_{i+1} <-> z_{i+2}."""
    k = num.var_count
    for i in range(k - 1):
        targets = list(range(k))
        targets[i], targets[i + 1] = targets[i + 1], targets[i]
        if substitute(num, relabel_images(targets, k), k) != num:
            return i
    return None


def wheel_check(num: LaurentPoly, k: int) -> bool:
    """True when num vanishes on both wheel loci (vacuous for k < 3)."""
    if k < 3:
        return True
    for q2_on_second in (False, True):
        if not substitute(num, _wheel_images(k, q2_on_second), k - 2).is_zero:
            return False
    return True


# -- elements --------------------------------------------------------------------


class ShuffleElement:
    """Immutable weight-k element; see the module docstring for the encoding."""

    __slots__ = ("k", "d", "num", "den")

    def __init__(self, k: int, num: LaurentPoly, den: LaurentPoly, d: int):
        if num.var_count != k:
            raise ValueError(f"num has {num.var_count} variables, expected {k}")
        if den.var_count != 0:
            raise ValueError("den must be parameter-only")
        if den.is_zero:
            raise ZeroDivisionError("element with zero denominator")
        self.k = k
        self.num = num
        self.den = den
        self.d = 0 if num.is_zero else d

    # -- predicates ---------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def __eq__(self, other) -> bool:
        if not isinstance(other, ShuffleElement):
            return NotImplemented
        if self.k != other.k:
            return False
        if self.is_zero or other.is_zero:
            return self.is_zero and other.is_zero
        if self.d != other.d:
            return False
        return self.num * other.den.embed(self.k) == other.num * self.den.embed(
            self.k
        )

    def __hash__(self):  # pragma: no cover
        raise TypeError("ShuffleElement is unhashable; compare by equality")

    # -- linear structure -----------------------------------------------------

    def __add__(self, other: "ShuffleElement") -> "ShuffleElement":
        if self.k != other.k:
            raise ValueError("cannot add elements of different weight")
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        if self.d != other.d:
            raise ValueError("cannot add elements of different degree")
        num = self.num * other.den.embed(self.k) + other.num * self.den.embed(self.k)
        return ShuffleElement(self.k, num, self.den * other.den, self.d)

    def __sub__(self, other: "ShuffleElement") -> "ShuffleElement":
        return self + (-other)

    def __neg__(self) -> "ShuffleElement":
        return ShuffleElement(self.k, -self.num, self.den, self.d)

    def scale(self, value) -> "ShuffleElement":
        """Multiply by a ParamScalar or a rational constant."""
        if not isinstance(value, ParamScalar):
            value = ParamScalar.from_value(value)
        if value.is_zero:
            return ShuffleElement(self.k, LaurentPoly.zero(self.k), self.den, 0)
        return ShuffleElement(
            self.k,
            self.num * value.num.embed(self.k),
            self.den * value.den,
            self.d,
        )

    # -- canonical form ----------------------------------------------------------

    def reduced(self) -> "ShuffleElement":
        num, den = reduce_fraction(self.num, self.den)
        return ShuffleElement(self.k, num, den, self.d)

    def serialize(self) -> str:
        red = self.reduced()
        return (
            f"k={red.k} d={red.d}\n"
            f"{red.num.canonical_text()}\n"
            f"{red.den.canonical_text()}"
        )

    def to_json_dict(self) -> dict:
        red = self.reduced()
        num_rows = [
            [int(c.numerator), int(c.denominator), *e]
            for e, c in sorted(red.num.terms.items())
        ]
        den_rows = [
            [int(c.numerator), int(c.denominator), *e]
            for e, c in sorted(red.den.terms.items())
        ]
        return {"k": red.k, "d": red.d, "num": num_rows, "den": den_rows}

    def __repr__(self):  # pragma: no cover
        return f"<ShuffleElement k={self.k} d={self.d} terms={len(self.num.terms)}>"


def parse_element(text: str) -> ShuffleElement:
    header, num_line, den_line = text.strip().split("\n")
    fields = dict(f.split("=") for f in header.split(" "))
    k = int(fields["k"])
    d = int(fields["d"])
    return ShuffleElement(k, parse_poly(num_line, k), parse_poly(den_line, 0), d)


ONE = ShuffleElement(0, LaurentPoly.const(1, 0), LaurentPoly.const(1, 0), 0)


def reduce_fraction(num: LaurentPoly, den: LaurentPoly) -> tuple:
    """Canonical representative of num/den, unique for a fixed value.

    Removes the parameter-polynomial gcd of num's z-coefficients and den,
    pins den's minimal s and q2 exponents to zero, scales both sides to
    coprime integer coefficients, and makes den's lex-leading coefficient
    positive.
    """
    k = num.var_count
    if num.is_zero:
        return num, LaurentPoly.const(1, 0)
    coeffs: dict = {}
    for e, c in num.terms.items():
        coeffs.setdefault(e[2:], {})[(e[0], e[1])] = c
    content = None
    for part in coeffs.values():
        content = param_gcd(content, LaurentPoly(part, 0))
        if content is not None and len(content.terms) == 1:
            break
    if content is not None and len(content.terms) > 1:
        g = param_gcd(content, den)
        if len(g.terms) > 1:
            num = exact_div(num, g.embed(k))
            den = exact_div(den, g)
    s_min = min(e[0] for e in den.terms)
    q2_min = min(e[1] for e in den.terms)
    if s_min or q2_min:
        den = den.shift(-s_min, -q2_min)
        num = num.shift(-s_min, -q2_min)
    all_coeffs = list(num.terms.values()) + list(den.terms.values())
    scale = mpq(
        math.lcm(*(int(c.denominator) for c in all_coeffs)),
        math.gcd(*(int(c.numerator) for c in all_coeffs)),
    )
    if den.terms[max(den.terms)] < 0:
        scale = -scale
    return num.scale(scale), den.scale(scale)


def make_element(k: int, num: LaurentPoly, den: LaurentPoly | None = None) -> ShuffleElement:
    """Validated constructor: checks homogeneity, symmetry, and the wheel
    conditions, and computes d from the numerator degree."""
    if den is None:
        den = LaurentPoly.const(1, 0)
    if isinstance(den, ParamScalar):
        num = num * den.den.embed(k)
        den = den.num
    if num.is_zero:
        return ShuffleElement(k, num, den, 0)
    degrees = num.z_degrees()
    if len(degrees) != 1:
        raise ValueError(f"numerator not z-homogeneous: degrees {sorted(degrees)}")
    d = degrees.pop() - k * (k - 1)
    bad = is_symmetric(num)
    if bad is not None:
        raise SymmetryViolation(
            f"numerator changes under the swap z{bad + 1} <-> z{bad + 2}"
        )
    if k >= 3:
        for q2_on_second, name in ((False, "q1"), (True, "q2")):
            if not substitute(num, _wheel_images(k, q2_on_second), k - 2).is_zero:
                raise WheelViolation(
                    "numerator nonzero under "
                    f"z1 -> q*w, z2 -> {name}*w, z3 -> w"
                )
    return ShuffleElement(k, num, den, d)


# -- shuffle product ---------------------------------------------------------------


def _coset_term(
    num_a: LaurentPoly,
    num_b: LaurentPoly,
    A: Sequence[int],
    B: Sequence[int],
    k: int,
) -> LaurentPoly:
    """One summand of the symmetrized product numerator, including the
    non-crossing Vandermonde factors and the coset sign."""
    term = substitute(num_a, relabel_images(A, k), k)
    term = term * substitute(num_b, relabel_images(B, k), k)
    for i in A:
        for j in B:
            term = term * diff_term(k, i, j, 2, 1)
            term = term * diff_term(k, j, i, 2, 0)
            term = term * diff_term(k, j, i, 0, 1)
    for group in (A, B):
        for a, b in combinations(group, 2):
            term = term * diff_term(k, a, b)
    inversions = sum(1 for m in B for n in A if m < n)
    return -term if inversions & 1 else term


def shuffle_mul(P: ShuffleElement, Q: ShuffleElement) -> ShuffleElement:
    """Product of two elements; weight and degree both add."""
    if P.k == 0:
        return Q.scale(ParamScalar(P.num, P.den))
    if Q.k == 0:
        return P.scale(ParamScalar(Q.num, Q.den))
    if P.is_zero or Q.is_zero:
        return ShuffleElement(
            P.k + Q.k, LaurentPoly.zero(P.k + Q.k), LaurentPoly.const(1, 0), 0
        )
    k = P.k + Q.k
    if accel.usable(k):
        num = accel.product_numerator(P.num, P.k, Q.num, Q.k)
        return ShuffleElement(k, num, P.den * Q.den, P.d + Q.d)
    total = LaurentPoly.zero(k)
    everyone = range(k)
    for A in combinations(everyone, P.k):
        B = tuple(i for i in everyone if i not in A)
        total = total + _coset_term(P.num, Q.num, A, B, k)
    num = total
    for i in range(k):
        for j in range(i + 1, k):
            num = exact_div(num, diff_term(k, i, j))
    return ShuffleElement(k, num, P.den * Q.den, P.d + Q.d)


def bracket(P: ShuffleElement, Q: ShuffleElement) -> ShuffleElement:
    return shuffle_mul(P, Q) - shuffle_mul(Q, P)


# -- degree profiles and scaling limits ----------------------------------------------


def xi_profile(P: ShuffleElement) -> list:
    """entries[i] for i = 0..k: the corrected top degree in the i fastest
    variables.  entries[0] = 0 and entries[k] = d always."""
    k = P.k
    if P.is_zero or k == 0:
        return [0] * (k + 1)
    best = [None] * (k + 1)
    best[0] = 0
    for e in P.num.terms:
        zs = sorted(e[2:], reverse=True)
        acc = 0
        for i in range(1, k + 1):
            acc += zs[i - 1]
            if best[i] is None or acc > best[i]:
                best[i] = acc
    return [best[i] - 2 * i * (k - i) - i * (i - 1) for i in range(k + 1)]


def is_minimal(P: ShuffleElement) -> bool:
    """True when the profile lies strictly under the chord from (0,0) to (k,d)."""
    if P.is_zero:
        return False
    entries = xi_profile(P)
    k, d = P.k, P.d
    return all(entries[i] * k < d * i for i in range(1, k))


def slope_at_most(P: ShuffleElement, mu) -> bool:
    mu = Fraction(mu)
    entries = xi_profile(P)
    return all(
        entries[i] * mu.denominator <= mu.numerator * i
        for i in range(P.k + 1)
    )


class TensorElement:
    """Tensor-square element with a joint numerator.

    joint_num lives in left_k + right_k variables (left group first); den is
    parameter-only; h0_pow counts grouplike h0 factors multiplying the left leg.
    """

    __slots__ = ("left_k", "right_k", "joint_num", "den", "h0_pow")

    def __init__(
        self,
        left_k: int,
        right_k: int,
        joint_num: LaurentPoly,
        den: LaurentPoly,
        h0_pow: int,
    ):
        if joint_num.var_count != left_k + right_k:
            raise ValueError("joint numerator variable count mismatch")
        if den.var_count != 0 or den.is_zero:
            raise ValueError("bad tensor denominator")
        self.left_k = left_k
        self.right_k = right_k
        self.joint_num = joint_num
        self.den = den
        self.h0_pow = h0_pow

    @property
    def is_zero(self) -> bool:
        return self.joint_num.is_zero

    def _shape(self) -> tuple:
        return (self.left_k, self.right_k, self.h0_pow)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TensorElement):
            return NotImplemented
        if self.is_zero or other.is_zero:
            return (
                self.is_zero
                and other.is_zero
                and (self.left_k, self.right_k) == (other.left_k, other.right_k)
            )
        if self._shape() != other._shape():
            return False
        k = self.left_k + self.right_k
        return self.joint_num * other.den.embed(k) == other.joint_num * self.den.embed(k)

    def __hash__(self):  # pragma: no cover
        raise TypeError("TensorElement is unhashable; compare by equality")

    def __add__(self, other: "TensorElement") -> "TensorElement":
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        if self._shape() != other._shape():
            raise ValueError("cannot add tensor elements of different shape")
        k = self.left_k + self.right_k
        num = self.joint_num * other.den.embed(k) + other.joint_num * self.den.embed(k)
        return TensorElement(
            self.left_k, self.right_k, num, self.den * other.den, self.h0_pow
        )

    def __sub__(self, other: "TensorElement") -> "TensorElement":
        return self + (-other)

    def __neg__(self) -> "TensorElement":
        return TensorElement(
            self.left_k, self.right_k, -self.joint_num, self.den, self.h0_pow
        )

    def scale(self, value) -> "TensorElement":
        if not isinstance(value, ParamScalar):
            value = ParamScalar.from_value(value)
        k = self.left_k + self.right_k
        if value.is_zero:
            return TensorElement(
                self.left_k, self.right_k, LaurentPoly.zero(k), self.den, self.h0_pow
            )
        return TensorElement(
            self.left_k,
            self.right_k,
            self.joint_num * value.num.embed(k),
            self.den * value.den,
            self.h0_pow,
        )

    def serialize(self) -> str:
        num, den = reduce_fraction(self.joint_num, self.den)
        return (
            f"left_k={self.left_k} right_k={self.right_k} h0={self.h0_pow}\n"
            f"{num.canonical_text()}\n{den.canonical_text()}"
        )

    def __repr__(self):  # pragma: no cover
        return (
            f"<TensorElement {self.left_k}x{self.right_k} h0^{self.h0_pow} "
            f"terms={len(self.joint_num.terms)}>"
        )


def tensor(P: ShuffleElement, Q: ShuffleElement, h0_pow: int = 0) -> TensorElement:
    """P (x) Q with the stated h0 power on the right leg."""
    k = P.k + Q.k
    left = substitute(P.num, relabel_images(range(P.k), k), k)
    right = substitute(Q.num, relabel_images(range(P.k, k), k), k)
    return TensorElement(P.k, Q.k, left * right, P.den * Q.den, h0_pow)


def tensor_shuffle_mul(T1: TensorElement, T2: TensorElement) -> TensorElement:
    """Componentwise product: left legs shuffle together, right legs shuffle
    together, h0 powers add."""
    lk = T1.left_k + T2.left_k
    rk = T1.right_k + T2.right_k
    k = lk + rk
    if T1.is_zero or T2.is_zero:
        return TensorElement(
            lk, rk, LaurentPoly.zero(k), LaurentPoly.const(1, 0), T1.h0_pow + T2.h0_pow
        )
    left_slots = range(lk)
    right_slots = range(lk, k)
    total = LaurentPoly.zero(k)
    for A in combinations(left_slots, T1.left_k):
        B = tuple(i for i in left_slots if i not in A)
        for C in combinations(right_slots, T1.right_k):
            D = tuple(i for i in right_slots if i not in C)
            t1 = substitute(T1.joint_num, relabel_images(list(A) + list(C), k), k)
            t2 = substitute(T2.joint_num, relabel_images(list(B) + list(D), k), k)
            term = t1 * t2
            for X, Y in ((A, B), (C, D)):
                for i in X:
                    for j in Y:
                        term = term * diff_term(k, i, j, 2, 1)
                        term = term * diff_term(k, j, i, 2, 0)
                        term = term * diff_term(k, j, i, 0, 1)
                for group in (X, Y):
                    for a, b in combinations(group, 2):
                        term = term * diff_term(k, a, b)
            inv = sum(1 for m in B for n in A if m < n)
            inv += sum(1 for m in D for n in C if m < n)
            total = total + (-term if inv & 1 else term)
    num = total
    for slots in (left_slots, right_slots):
        for i, j in combinations(slots, 2):
            num = exact_div(num, diff_term(k, i, j))
    return TensorElement(lk, rk, num, T1.den * T2.den, T1.h0_pow + T2.h0_pow)


def scaling_limit(P: ShuffleElement, i: int, mu):
    """Limit of P when the last k - i variables are scaled to infinity at
    rate mu.

    Returns a TensorElement splitting the variables i | k - i, the ZERO
    sentinel when the limit vanishes, and raises SlopeExceeded when the
    element grows faster than mu allows.
    """
    k = P.k
    if not 0 <= i <= k:
        raise ValueError(f"split {i} out of range for k={k}")
    if P.is_zero:
        return ZERO
    mu = Fraction(mu)
    m = k - i
    top = max(sum(e[2 + i :]) for e in P.num.terms)
    g = top - 2 * i * m - m * (m - 1)
    lhs = g * mu.denominator
    rhs = mu.numerator * m
    if lhs > rhs:
        raise SlopeExceeded(
            f"profile gap {g} exceeds slope budget {mu} * {m} at split {i}"
        )
    if lhs < rhs:
        return ZERO
    keep = {e: c for e, c in P.num.terms.items() if sum(e[2 + i :]) == top}
    shift = [0, 0] + [0] * i + [-2 * i] * m
    joint = LaurentPoly(keep, k).shift(z_exps=shift[2:])
    den = P.den.shift(2 * i * m, i * m)
    return TensorElement(i, m, joint, den, m)
