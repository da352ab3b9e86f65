"""Optional native backend for the two hottest polynomial loops.

The compiled extension stores exponent vectors packed into 128-bit keys in
open-addressing tables, with either overflow-checked 64-bit integer or GMP
rational coefficients.  Integer tables are tried first; a coefficient that
does not fit signals OverflowError and the call is redone with rationals.

Both heavy routines run as chains of adjacent divided differences (subtract
a transposed copy, divide exactly by the variable difference), so the signed
sums over head placements or cosets are never materialized and one state
polynomial is live at a time.  The direct summed forms are retained
(x_total, product_total) as independent oracles.

Every production routine here has a pure-Python twin that produces identical
results, term for term, and parity between the two is pinned by tests.
"""

from itertools import combinations
from typing import Sequence

from gmpy2 import mpq

from .exactalg import LaurentPoly

try:
    from . import _fastcore
except ImportError:  # pragma: no cover - build without the extension
    _fastcore = None

AVAILABLE = _fastcore is not None
MAX_Z_VARS = 8  # the packed key holds s, q2 and at most eight z slots


def usable(z_vars: int) -> bool:
    return AVAILABLE and z_vars <= MAX_Z_VARS


def to_native(p: LaurentPoly, integral: bool = False):
    if integral:
        return _fastcore.IPoly.from_terms(
            p.var_count + 2, [(e, int(c)) for e, c in p.terms.items()]
        )
    return _fastcore.Poly.from_terms(
        p.var_count + 2, [(e, str(c)) for e, c in p.terms.items()]
    )


def from_native(native, var_count: int) -> LaurentPoly:
    return LaurentPoly({tuple(e): mpq(c) for e, c in native.to_terms()}, var_count)


def is_integral(p: LaurentPoly) -> bool:
    return all(c.denominator == 1 for c in p.terms.values())


def _vandermonde_quotient(total, k: int):
    for i in range(k):
        for j in range(i + 1, k):
            total = total.divexact_binomial(i, j)
    return total


def x_total(m: Sequence[int], rational: bool = False):
    """Pre-division staircase total: the numerator times the difference
    product, computed by the one-state suffix recursion."""
    m = tuple(m)
    k = len(m)
    P = _fastcore.Poly if rational else _fastcore.IPoly
    wrap = str if rational else int
    state = P.from_terms(3, [((0, 0, m[k - 1]), wrap(1))])
    for s in range(1, k):
        exp = m[k - s - 1] + 1
        one = P.from_terms(s + 3, [((0,) * (s + 3), wrap(1))])
        # pres/sufs of the link chain (z_0 - q z_u), u = 1..s
        pres = [one]
        for u in range(1, s + 1):
            pres.append(pres[-1].mul_binomial(0, u, 2, 1))
        sufs = [one] * (s + 1)
        for t in range(s - 1, -1, -1):
            sufs[t] = sufs[t + 1].mul_binomial(0, t + 1, 2, 1)
        acc = P(s + 3)
        for i in range(s):
            # old head 0 lands on i+1, the rest keep their relative order
            mapping = [i + 1] + [u if u <= i else u + 1 for u in range(1, s)]
            img = state.relabel_map(s + 1, mapping)
            if i & 1:
                img.scale_ip(wrap(-1))
            acc.mul_add_into(pres[i].mul(sufs[i + 1]), img)
            img.clear()
        state.clear()
        for t in range(1, s + 1):
            acc = acc.mul_binomial(t, 0, 2, 0)
            acc = acc.mul_binomial(t, 0, 0, 1)
        acc.shift_ip([0, 0, exp] + [0] * s)
        state = acc
    total = P(k + 2)
    for j in range(k):
        mapping = [j] + list(range(j)) + list(range(j + 1, k))
        total.add_relabeled(state, k, mapping, -1 if j & 1 else 1)
    state.clear()
    return total


def product_total(na, nb, k_a: int, k_b: int):
    """Pre-division product total: first coset term, then signed relabeled
    images of it accumulated over all cosets.  Inputs are native polys."""
    k = k_a + k_b
    P = type(na)
    term = na.relabel_map(k, list(range(k_a))).mul(nb.relabel_map(k, list(range(k_a, k))))
    for i in range(k_a):
        for j in range(k_a, k):
            term = term.mul_binomial(i, j, 2, 1)
            term = term.mul_binomial(j, i, 2, 0)
            term = term.mul_binomial(j, i, 0, 1)
    for group in (range(k_a), range(k_a, k)):
        for a, b in combinations(group, 2):
            term = term.mul_binomial(a, b)
    total = P(k + 2)
    for A in combinations(range(k), k_a):
        B = tuple(i for i in range(k) if i not in A)
        inversions = sum(1 for m in B for n in A if m < n)
        total.add_relabeled(term, k, list(A) + list(B), -1 if inversions & 1 else 1)
    term.clear()
    return total


def _adjacent_dd(f, t):
    """(f - swap_t f) / (z_t - z_{t+1}), consuming f.

    The division is exact whenever f came from data that is symmetric in the
    variables the chain has not reached yet; a violation surfaces as an
    immediate non-exact-division error from the native layer."""
    g = f.swap_sub(t)
    f.clear()
    return g.divexact_binomial(t + 1, t, consume=True)


def x_divided(m: Sequence[int], rational: bool = False):
    """Staircase numerator via chains of adjacent divided differences,
    never materializing the pre-division total.

    Each level of the suffix recursion sums signed head placements over the
    difference product of the non-head variables.  Because the reduced state
    is symmetric in its non-head variables, that sum is a divided difference
    of a single data polynomial over the node variables, and a divided
    difference over consecutive variables factors into adjacent
    subtract-and-divide steps.  The same collapse applies to the final sum
    over head positions, which yields the numerator directly.  Exactly one
    state polynomial is live at any moment, near the size of the answer."""
    m = tuple(m)
    k = len(m)
    P = _fastcore.Poly if rational else _fastcore.IPoly
    h = P.from_terms(3, [((0, 0, m[k - 1]), (str if rational else int)(1))])
    for s in range(1, k):
        # data polynomial: head moved to z_1, links skip the head's own node
        f = h.relabel_map(s + 1, list(range(1, s + 1)))
        h.clear()
        for u in range(2, s + 1):
            f = f.mul_binomial(0, u, 2, 1)
        for t in range(1, s):
            f = _adjacent_dd(f, t)
        for t in range(1, s + 1):
            f = f.mul_binomial(t, 0, 2, 0)
            f = f.mul_binomial(t, 0, 0, 1)
        f.shift_ip([0, 0, m[k - s - 1] + 1] + [0] * s)
        h = f
    for t in range(k - 1):
        h = _adjacent_dd(h, t)
    return h


def x_divided_auto(m: Sequence[int]):
    """Staircase numerator handle, int64 first with rational retry."""
    try:
        return x_divided(m)
    except OverflowError:
        return x_divided(m, rational=True)


def x_chain_numerator(m: Sequence[int]) -> LaurentPoly:
    """Native twin of the suffix recursion in generators.build_X."""
    return from_native(x_divided_auto(m), len(m))


def product_cross_term(na, nb, k_a: int, k_b: int):
    """First coset term without the within-group difference products."""
    k = k_a + k_b
    term = na.relabel_map(k, list(range(k_a))).mul(nb.relabel_map(k, list(range(k_a, k))))
    for i in range(k_a):
        for j in range(k_a, k):
            term = term.mul_binomial(i, j, 2, 1)
            term = term.mul_binomial(j, i, 2, 0)
            term = term.mul_binomial(j, i, 0, 1)
    return term


def product_divided(na, nb, k_a: int, k_b: int):
    """Product numerator via a parabolic chain of adjacent divided
    differences, never materializing the pre-division coset sum.

    Because both factor numerators are symmetric, the signed coset sum over
    the full difference product equals a fixed chain of adjacent
    subtract-and-divide steps applied to the single cross term: each variable
    of the left block is bubbled across the right block, innermost first.
    One polynomial is live at a time, against binomially many coset images."""
    f = product_cross_term(na, nb, k_a, k_b)
    for i in range(k_a - 1, -1, -1):
        for t in range(i, i + k_b):
            f = _adjacent_dd(f, t)
    return f


def product_numerator(
    num_a: LaurentPoly, k_a: int, num_b: LaurentPoly, k_b: int
) -> LaurentPoly:
    """Native twin of the coset sum in shuffle_core.shuffle_mul."""
    k = k_a + k_b
    num = None
    if is_integral(num_a) and is_integral(num_b):
        try:
            num = product_divided(
                to_native(num_a, integral=True), to_native(num_b, integral=True), k_a, k_b
            )
        except OverflowError:
            num = None
    if num is None:
        num = product_divided(to_native(num_a), to_native(num_b), k_a, k_b)
    return from_native(num, k)
