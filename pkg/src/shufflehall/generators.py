"""Constructions of the distinguished generator family P(k,d).

Two independent routes are provided.  build_P assembles each generator as an
explicit symmetrized sum over binary strings (build_X_eps / build_X below),
normalized by a fixed parameter prefactor.  build_P_recursive builds the same
element by lattice-triangle recursion: degree (k,d) with gcd n is reached
through a commutator over a primitive empty triangle, with exponential-sum
corrections in the non-primitive case.  The recursive route also carries a
formal word expansion (a linear combination of concatenation words whose
letters are weight-one degrees), which the pairing machinery consumes.

Conventions: q1 = s^2, q = q1*q2, and alpha(n) is the canonical scalar
(q1^n - 1)(q2^n - 1)(q^-n - 1)/n.
"""

from __future__ import annotations

import math
import operator
from itertools import permutations
from typing import Iterator, Sequence

from . import accel
from .exactalg import (
    LaurentPoly,
    PS_ONE,
    ParamScalar,
    exact_div,
    mpq,
)
from .shuffle_core import (
    ONE,
    ShuffleElement,
    bracket,
    diff_term,
    shuffle_mul,
)


class NoEmptyTriangle(RuntimeError):
    """No admissible primitive triangle sits under the requested degree."""


def alpha(n: int) -> ParamScalar:
    """The scalar alpha_n = (q1^n - 1)(q2^n - 1)(q^-n - 1)/n."""
    if n < 1:
        raise ValueError("alpha is defined for n >= 1")
    return (
        (ParamScalar.q1_power(n) - 1)
        * (ParamScalar.q2_power(n) - 1)
        * (ParamScalar.q_power(-n) - 1)
        / n
    )


# -- words -----------------------------------------------------------------------


def _z_power_element(d: int) -> ShuffleElement:
    return ShuffleElement(
        1, LaurentPoly.z_var(0, 1, d), LaurentPoly.const(1, 0), d
    )


_WORD_ELEMENTS: dict = {}


def word_to_element(word: Sequence[int]) -> ShuffleElement:
    """Shuffle product z^{n1} * z^{n2} * ... * z^{nk} for word (n1..nk)."""
    word = tuple(word)
    if not word:
        return ONE
    cached = _WORD_ELEMENTS.get(word)
    if cached is not None:
        return cached
    out = _z_power_element(word[0])
    for n in word[1:]:
        out = shuffle_mul(out, _z_power_element(n))
    _WORD_ELEMENTS[word] = out
    return out


class WordExpression:
    """Formal ParamScalar-linear combination of concatenation words."""

    __slots__ = ("terms",)

    def __init__(self, terms: dict):
        self.terms = {w: c for w, c in terms.items() if not c.is_zero}

    @staticmethod
    def zero() -> "WordExpression":
        return WordExpression({})

    @staticmethod
    def from_word(word: Sequence[int], coeff: ParamScalar = PS_ONE) -> "WordExpression":
        return WordExpression({tuple(word): coeff})

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, WordExpression):
            return NotImplemented
        if set(self.terms) != set(other.terms):
            return False
        return all(self.terms[w] == other.terms[w] for w in self.terms)

    def __hash__(self):  # pragma: no cover
        raise TypeError("WordExpression is unhashable")

    def __add__(self, other: "WordExpression") -> "WordExpression":
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out[w] + c if w in out else c
        return WordExpression(out)

    def __sub__(self, other: "WordExpression") -> "WordExpression":
        return self + (-other)

    def __neg__(self) -> "WordExpression":
        return WordExpression({w: -c for w, c in self.terms.items()})

    def scale(self, value) -> "WordExpression":
        if not isinstance(value, ParamScalar):
            value = ParamScalar.from_value(value)
        return WordExpression({w: c * value for w, c in self.terms.items()})

    def concat(self, other: "WordExpression") -> "WordExpression":
        out: dict = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = w1 + w2
                c = c1 * c2
                out[w] = out[w] + c if w in out else c
        return WordExpression(out)

    def commutator(self, other: "WordExpression") -> "WordExpression":
        return self.concat(other) - other.concat(self)

    def to_element(self) -> ShuffleElement:
        if not self.terms:
            raise ValueError("empty word expression has no weight")
        out = None
        for w in sorted(self.terms):
            piece = word_to_element(w).scale(self.terms[w])
            out = piece if out is None else out + piece
        return out

    def canonical_text(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for w in sorted(self.terms):
            body = ",".join(str(n) for n in w)
            parts.append(f"({self.terms[w].canonical_text()}) [{body}]")
        return " + ".join(parts)

    def __repr__(self):  # pragma: no cover
        return f"WordExpression({self.canonical_text()})"


# -- the symmetrized X construction -------------------------------------------------


def _perm_sign(sigma: Sequence[int]) -> int:
    inv = 0
    for i in range(len(sigma)):
        for j in range(i + 1, len(sigma)):
            if sigma[i] > sigma[j]:
                inv += 1
    return -1 if inv & 1 else 1


def _build_X_by_permutations(m: Sequence[int]) -> ShuffleElement:
    """Reference construction of the chain element by brute permutation sum.

    The numerator is the alternating permutation sum of monomial chains with
    adjacent q-link factors and one-sided q1/q2 factors, divided exactly by
    the Vandermonde determinant; the degree is sum(m).  Exponential in k;
    kept as an oracle for the suffix recursion below.
    """
    m = tuple(m)
    k = len(m)
    if k < 1:
        raise ValueError("build_X needs at least one exponent")
    total = LaurentPoly.zero(k)
    for sigma in permutations(range(k)):
        exps = [0] * k
        for j in range(k):
            exps[sigma[j]] = m[j] + (1 if j < k - 1 else 0)
        term = LaurentPoly.monomial(_perm_sign(sigma), 0, 0, exps)
        for i in range(k):
            for j in range(i + 2, k):
                term = term * diff_term(k, sigma[i], sigma[j], 2, 1)
        for i in range(k):
            for j in range(i + 1, k):
                term = term * diff_term(k, sigma[j], sigma[i], 2, 0)
                term = term * diff_term(k, sigma[j], sigma[i], 0, 1)
        total = total + term
    num = total
    for i in range(k):
        for j in range(i + 1, k):
            num = exact_div(num, diff_term(k, i, j))
    return ShuffleElement(k, num, LaurentPoly.const(1, 0), sum(m))


def _relabel_insert(p: LaurentPoly, j: int) -> LaurentPoly:
    """Reindex onto one more variable: old z_t maps to z_t for t < j and to
    z_{t+1} for t >= j, leaving slot j with exponent zero."""
    cut = 2 + j
    return LaurentPoly(
        {e[:cut] + (0,) + e[cut:]: c for e, c in p.terms.items()},
        p.var_count + 1,
    )


def _mul_add_into(acc: dict, a: dict, b: dict) -> None:
    add = operator.add
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = tuple(map(add, ea, eb))
            v = acc.get(e)
            if v is None:
                acc[e] = ca * cb
            else:
                v = v + ca * cb
                if v:
                    acc[e] = v
                else:
                    del acc[e]


def build_X(m: Sequence[int]) -> ShuffleElement:
    """Symmetrized chain element for an exponent sequence m of length k.

    Computed by a head-indexed suffix recursion instead of the k! permutation
    sum: the signed sum over orderings of a variable subset with a fixed
    front element only depends on the subset through relabeling, so one
    polynomial per (level, head) suffices.  Appending a new front variable v
    contributes its position monomial, q-link factors to every suffix
    variable except the previous head, and q1/q2 factors to all of them.
    """
    m = tuple(m)
    k = len(m)
    if k < 1:
        raise ValueError("build_X needs at least one exponent")
    if accel.usable(k):
        return ShuffleElement(
            k, accel.x_chain_numerator(m), LaurentPoly.const(1, 0), sum(m)
        )
    states = [LaurentPoly.z_var(0, 1, m[k - 1])]
    for s in range(1, k):
        exp = m[k - s - 1] + 1
        new_states = []
        for j in range(s + 1):
            others = [u for u in range(s + 1) if u != j]
            links = [diff_term(s + 1, j, u, 2, 1) for u in others]
            pres = [LaurentPoly.const(1, s + 1)]
            for f in links:
                pres.append(pres[-1] * f)
            sufs = [LaurentPoly.const(1, s + 1) for _ in range(s + 1)]
            for t in range(s - 1, -1, -1):
                sufs[t] = sufs[t + 1] * links[t]
            acc: dict = {}
            for i in range(s):
                head = i if i < j else i + 1
                t = others.index(head)
                ps = pres[t] * sufs[t + 1]
                _mul_add_into(acc, ps.terms, _relabel_insert(states[i], j).terms)
            out = LaurentPoly(acc, s + 1)
            for t in others:
                out = out * diff_term(s + 1, t, j, 2, 0)
                out = out * diff_term(s + 1, t, j, 0, 1)
            out = out.shift(z_exps=tuple(exp if t == j else 0 for t in range(s + 1)))
            if j & 1:
                out = out.scale(-1)
            new_states.append(out)
        states = new_states
    total = LaurentPoly.zero(k)
    for h in states:
        total = total + h
    num = total
    for i in range(k):
        for j in range(i + 1, k):
            num = exact_div(num, diff_term(k, i, j))
    return ShuffleElement(k, num, LaurentPoly.const(1, 0), sum(m))


class EpsilonVector:
    """Binary-string datum (a, b, n, bits) for degree (k, d) = (n*a, n*b).

    bits has length n - 1; gcd(a, b) must be 1 with a >= 1.
    """

    __slots__ = ("a", "b", "n", "bits")

    def __init__(self, a: int, b: int, n: int, bits):
        if not isinstance(bits, str):
            bits = "".join(str(int(x)) for x in bits)
        if a < 1 or n < 1:
            raise ValueError("need a >= 1 and n >= 1")
        if math.gcd(a, b) != 1:
            raise ValueError(f"({a},{b}) is not primitive")
        if len(bits) != n - 1 or set(bits) - {"0", "1"}:
            raise ValueError(f"bits {bits!r} must be binary of length {n - 1}")
        self.a = a
        self.b = b
        self.n = n
        self.bits = bits

    @property
    def k(self) -> int:
        return self.n * self.a

    @property
    def d(self) -> int:
        return self.n * self.b

    def cache_key(self) -> str:
        return f"X:{self.a}:{self.b}:{self.n}:{self.bits}"

    def prefix_sums(self) -> list:
        """S_0..S_k with S_i = floor(i*d/k) minus the bit at multiples of a."""
        k, d = self.k, self.d
        out = []
        for i in range(k + 1):
            s = (i * d) // k
            if i % self.a == 0 and 1 <= i // self.a <= self.n - 1:
                s -= int(self.bits[i // self.a - 1])
            out.append(s)
        return out

    def m_vector(self) -> tuple:
        s = self.prefix_sums()
        return tuple(s[i] - s[i - 1] for i in range(1, self.k + 1))

    def __repr__(self):  # pragma: no cover
        return f"EpsilonVector(a={self.a}, b={self.b}, n={self.n}, bits={self.bits!r})"


def build_X_eps(e: EpsilonVector) -> ShuffleElement:
    return build_X(e.m_vector())


# -- the closed-form construction ----------------------------------------------------


def _ray_of(k: int, d: int) -> tuple:
    if k < 1:
        raise ValueError("weight must be positive")
    n = math.gcd(k, d)
    return n, k // n, d // n


def _p_prefactor(k: int, n: int) -> ParamScalar:
    q1 = ParamScalar.q1_power(1)
    q2 = ParamScalar.q2_power(1)
    return ((q1 - 1) ** k) * ((1 - q2) ** k) / (
        (ParamScalar.q1_power(n) - 1) * (1 - ParamScalar.q2_power(n))
    )


def build_P(k: int, d: int) -> ShuffleElement:
    """Closed-form generator: q-weighted sum of the build_X_eps elements over
    the staircase strings 0^r 1^s, times the standard prefactor."""
    n, a, b = _ray_of(k, d)
    total = None
    for s in range(n):
        x = build_X_eps(EpsilonVector(a, b, n, "0" * (n - 1 - s) + "1" * s))
        x = x.scale(ParamScalar.q_power(s))
        total = x if total is None else total + x
    return total.scale(_p_prefactor(k, n))


def literal_m_vectors(k: int, d: int) -> list:
    """Exponent sequences of the fully unraveled sum, in the s = 0..n-1 order:
    the staircase differences with one unit moved from slot a*y to a*y + 1 for
    each y in n-s..n-1."""
    n, a, _ = _ray_of(k, d)
    base = [(i * d) // k - ((i - 1) * d) // k for i in range(1, k + 1)]
    out = []
    for s in range(n):
        m = list(base)
        for y in range(n - s, n):
            m[a * y - 1] -= 1
            m[a * y] += 1
        out.append(tuple(m))
    return out


def build_P_literal(k: int, d: int) -> ShuffleElement:
    """Same element as build_P, assembled from the literal unraveled exponent
    sequences; used as a transcription cross-check."""
    n, _, _ = _ray_of(k, d)
    total = None
    for s, m in enumerate(literal_m_vectors(k, d)):
        x = build_X(m).scale(ParamScalar.q_power(s))
        total = x if total is None else total + x
    return total.scale(_p_prefactor(k, n))


# -- the recursive construction --------------------------------------------------------


def empty_triangle_candidates(k: int, d: int) -> list:
    """Primitive empty triangles under (k, d), as ((k1,d1),(k2,d2)) pairs with
    k1 + k2 = k, d1 + d2 = d, determinant k2*d1 - k1*d2 = gcd(k, d), and both
    edge vectors primitive.  Ordered by increasing k2; deterministic."""
    n = math.gcd(k, d)
    out = []
    for k2 in range(1, k):
        t = k2 * d - n
        if t % k:
            continue
        d2 = t // k
        k1, d1 = k - k2, d - d2
        if math.gcd(k2, d2) == 1 and math.gcd(k1, d1) == 1:
            out.append(((k1, d1), (k2, d2)))
    return out


def _compositions(total: int, parts: int) -> Iterator[tuple]:
    """Ordered tuples of positive integers with the given length and sum."""
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


_REC_CACHE: dict = {}


def build_P_recursive(k: int, d: int, triangle_rank: int = 0):
    """Triangle recursion; returns (WordExpression, ShuffleElement).

    triangle_rank selects the triangle candidate (falling back to the first
    when fewer are available); the resulting element never depends on it.
    """
    key = (k, d, triangle_rank)
    cached = _REC_CACHE.get(key)
    if cached is not None:
        return cached
    if k < 1:
        raise ValueError("weight must be positive")
    if k == 1:
        out = (WordExpression.from_word((d,)), _z_power_element(d))
        _REC_CACHE[key] = out
        return out
    n = math.gcd(k, d)
    cands = empty_triangle_candidates(k, d)
    if not cands:
        raise NoEmptyTriangle(f"no primitive empty triangle under ({k},{d})")
    (k1, d1), (k2, d2) = cands[min(triangle_rank, len(cands) - 1)]
    w1, p1 = build_P_recursive(k1, d1, triangle_rank)
    w2, p2 = build_P_recursive(k2, d2, triangle_rank)
    if n == 1:
        out = (w1.commutator(w2), bracket(p1, p2))
        _REC_CACHE[key] = out
        return out
    a, b = k // n, d // n
    subs = [build_P_recursive(m * a, m * b, triangle_rank) for m in range(1, n)]
    a1 = alpha(1)
    theta_w = w1.commutator(w2).scale(a1)
    theta_e = bracket(p1, p2).scale(a1)
    fact = 1
    for j in range(2, n + 1):
        fact *= j
        for comp in _compositions(n, j):
            coeff = ParamScalar.from_value(mpq(1, fact))
            for m in comp:
                coeff = coeff * alpha(m)
            word = subs[comp[0] - 1][0]
            elem = subs[comp[0] - 1][1]
            for m in comp[1:]:
                word = word.concat(subs[m - 1][0])
                elem = shuffle_mul(elem, subs[m - 1][1])
            theta_w = theta_w - word.scale(coeff)
            theta_e = theta_e - elem.scale(coeff)
    inv = alpha(n).inverse()
    out = (theta_w.scale(inv), theta_e.scale(inv))
    _REC_CACHE[key] = out
    return out


def build_theta_Q(a: int, b: int, n_max: int) -> tuple:
    """Exponential-sum elements theta_n along the primitive ray (a, b), and
    the grouplike family Q_n, which coincides with it; returns two lists of
    length n_max (index n-1 holds degree (n*a, n*b))."""
    if math.gcd(a, b) != 1 or a < 1:
        raise ValueError(f"({a},{b}) is not a primitive ray")
    gens = {m: build_P(m * a, m * b) for m in range(1, n_max + 1)}
    thetas = []
    for n in range(1, n_max + 1):
        acc = None
        for j in range(1, n + 1):
            for comp in _compositions(n, j):
                coeff = ParamScalar.from_value(mpq(1, math.factorial(j)))
                prod = None
                for m in comp:
                    coeff = coeff * alpha(m)
                    prod = gens[m] if prod is None else shuffle_mul(prod, gens[m])
                term = prod.scale(coeff)
                acc = term if acc is None else acc + term
        thetas.append(acc)
    return thetas, list(thetas)
