"""Lattice-triangle geometry and the relation/rank verifiers built on it.

Triangles have vertices (0,0), (k2,d2), and (k1+k2, d1+d2); Pick's theorem
decides emptiness from the determinant and the boundary counts.  The degree
plane convention puts weight k on the horizontal axis, so slopes are d/k and
the first edge of a triangle must have the larger slope (positive
determinant k2*d1 - k1*d2).
"""

from __future__ import annotations

import math
import random
from fractions import Fraction
from typing import Iterator, Sequence

from .exactalg import LaurentPoly, ParamScalar, mpq
from .generators import alpha, build_P, build_theta_Q
from .shuffle_core import ShuffleElement, bracket, shuffle_mul


class LatticeTriangle:
    """Ordered pair of edge vectors (k1,d1), (k2,d2) spanning the triangle
    (0,0), (k2,d2), (k,d) with k = k1+k2, d = d1+d2."""

    __slots__ = ("x1", "x2")

    def __init__(self, x1: Sequence[int], x2: Sequence[int]):
        k1, d1 = x1
        k2, d2 = x2
        if k1 < 1 or k2 < 1:
            raise ValueError("edge weights must be positive")
        self.x1 = (k1, d1)
        self.x2 = (k2, d2)

    @property
    def total(self) -> tuple:
        return (self.x1[0] + self.x2[0], self.x1[1] + self.x2[1])

    @property
    def det(self) -> int:
        return self.x2[0] * self.x1[1] - self.x1[0] * self.x2[1]

    def boundary_count(self) -> int:
        """Lattice points on the three edges, vertices counted once each."""
        (k1, d1), (k2, d2) = self.x1, self.x2
        k, d = self.total
        return math.gcd(k1, d1) + math.gcd(k2, d2) + math.gcd(k, d)

    def interior_count(self) -> int:
        return (abs(self.det) - self.boundary_count() + 2) // 2

    def __repr__(self):  # pragma: no cover
        return f"LatticeTriangle({self.x1}, {self.x2})"


def classify_triangle(t: LatticeTriangle) -> str:
    """One of 'empty', 'quasi-empty', 'neither', or 'degenerate'.

    Empty: no interior points and both short edges primitive.  Quasi-empty:
    no interior points and at least one short edge primitive, but not empty.
    """
    if t.det == 0:
        return "degenerate"
    if t.interior_count() > 0:
        return "neither"
    clean1 = math.gcd(*t.x1) == 1
    clean2 = math.gcd(*t.x2) == 1
    if clean1 and clean2:
        return "empty"
    if clean1 or clean2:
        return "quasi-empty"
    return "neither"


def verify_relation0(p1: Sequence[int], p2: Sequence[int]) -> bool:
    """Generators on a common ray commute."""
    (k1, d1), (k2, d2) = p1, p2
    if k1 * d2 != k2 * d1:
        raise ValueError(f"{p1} and {p2} are not collinear")
    a = build_P(k1, d1)
    b = build_P(k2, d2)
    return shuffle_mul(a, b) == shuffle_mul(b, a)


def verify_relation(t: LatticeTriangle) -> bool:
    """The commutator relation over an empty or quasi-empty triangle: alpha_1
    times the bracket of the edge generators equals the exponential-sum
    element of the total degree."""
    label = classify_triangle(t)
    if label not in ("empty", "quasi-empty"):
        raise ValueError(f"triangle is {label}; the relation needs an empty one")
    if t.det < 0:
        raise ValueError("edges must be ordered by decreasing slope")
    (k1, d1), (k2, d2) = t.x1, t.x2
    k, d = t.total
    n = math.gcd(k, d)
    thetas, _ = build_theta_Q(k // n, d // n, n)
    lhs = bracket(build_P(k1, d1), build_P(k2, d2)).scale(alpha(1))
    return lhs == thetas[n - 1]


# -- slope-bounded collections -------------------------------------------------------


def _collections(k: int, d: int, mu: Fraction) -> Iterator[tuple]:
    """Unordered multisets of degrees (k_i, d_i), each of slope <= mu, summing
    to (k, d); emitted as lex-descending tuples."""

    def rec(k_rem: int, d_rem: int, bound: tuple) -> Iterator[tuple]:
        if k_rem == 0:
            if d_rem == 0:
                yield ()
            return
        for k1 in range(min(bound[0], k_rem), 0, -1):
            d_top = (mu.numerator * k1) // mu.denominator
            if k1 == bound[0]:
                d_top = min(d_top, bound[1])
            spare = k_rem - k1
            d_floor = d_rem - (mu.numerator * spare) // mu.denominator
            for d1 in range(d_top, d_floor - 1, -1):
                for rest in rec(spare, d_rem - d1, (k1, d1)):
                    yield ((k1, d1),) + rest

    top = (mu.numerator * k) // mu.denominator
    yield from rec(k, d, (k, top))


def count_collections(k: int, d: int, mu) -> int:
    if k < 0:
        raise ValueError("weight must be nonnegative")
    return sum(1 for _ in _collections(k, d, Fraction(mu)))


def collection_product(parts: Sequence[tuple]) -> ShuffleElement:
    """Product of the part generators in increasing slope order, ties broken
    by increasing weight."""
    ordered = sorted(parts, key=lambda p: (Fraction(p[1], p[0]), p[0]))
    out = None
    for kk, dd in ordered:
        p = build_P(kk, dd)
        out = p if out is None else shuffle_mul(out, p)
    return out


def _specialized_rank(rows: list, s_val, q2_val) -> int | None:
    """Rank after the substitution s -> s_val, q2 -> q2_val; None when a
    denominator vanishes there."""
    numeric = []
    for num, den in rows:
        dv = mpq(0)
        for e, c in den.terms.items():
            dv += c * s_val ** e[0] * q2_val ** e[1]
        if not dv:
            return None
        vec = {}
        for e, c in num.terms.items():
            key = e[2:]
            vec[key] = vec.get(key, mpq(0)) + c * s_val ** e[0] * q2_val ** e[1]
        numeric.append({k: v / dv for k, v in vec.items() if v})
    basis: list = []
    rank = 0
    for row in numeric:
        while row:
            pivot = min(row)
            hit = None
            for basis_pivot, basis_row in basis:
                if basis_pivot == pivot:
                    hit = basis_row
                    break
            if hit is None:
                basis.append((pivot, row))
                rank += 1
                break
            factor = row[pivot] / hit[pivot]
            new = {}
            for kk, vv in row.items():
                w = vv - factor * hit.get(kk, mpq(0))
                if w:
                    new[kk] = w
            for kk, vv in hit.items():
                if kk not in row:
                    w = -factor * vv
                    if w:
                        new[kk] = w
            row = new
    return rank


def _exact_rank(rows: list) -> int:
    """Gaussian elimination over the parameter fraction field."""
    basis: list = []
    rank = 0
    zero = ParamScalar.from_value(0)
    vec_rows = []
    for num, den in rows:
        vec = {}
        for e, c in num.terms.items():
            key = e[2:]
            poly = vec.get(key)
            mono = LaurentPoly.param(c, e[0], e[1])
            vec[key] = mono if poly is None else poly + mono
        vec_rows.append(
            {k: ParamScalar(v, den) for k, v in vec.items() if not v.is_zero}
        )
    for row in vec_rows:
        while row:
            pivot = min(row)
            hit = next((b for p, b in basis if p == pivot), None)
            if hit is None:
                basis.append((pivot, row))
                rank += 1
                break
            factor = row[pivot] / hit[pivot]
            new = {}
            keys = set(row) | set(hit)
            for kk in keys:
                w = row.get(kk, zero) - factor * hit.get(kk, zero)
                if not w.is_zero:
                    new[kk] = w
            row = new
    return rank


def basis_rank(k: int, d: int, mu) -> int:
    """Dimension of the span of all slope-bounded collection products of
    total degree (k, d).  Guarded to k <= 4."""
    if k > 4:
        raise ValueError("basis_rank is limited to weight k <= 4")
    mu = Fraction(mu)
    rows = []
    for parts in _collections(k, d, mu):
        if not parts:
            continue
        el = collection_product(parts)
        rows.append((el.num, el.den))
    if not rows:
        return 0
    rng = random.Random(20260817)
    for _ in range(2):
        s_val = mpq(rng.randrange(3, 60), rng.randrange(1, 7))
        q2_val = mpq(rng.randrange(3, 60), rng.randrange(1, 7))
        r = _specialized_rank(rows, s_val, q2_val)
        if r == len(rows):
            return r
    return _exact_rank(rows)
