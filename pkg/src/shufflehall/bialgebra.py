"""Coproducts, h-series bookkeeping, and the constant-term pairing.

The algebra is extended by commuting symbols h_0, h_1, ... collected into the
series h(w) = sum_n h_n w^-n.  Moving an element past h(w) costs a correction
factor per variable whose expansion coefficients live in the parameter ring,
so products with h's normal-order to finite sums within any degree window.

The coproduct splits the variables of an element into a left and a right
group.  Each cross pair (z_a left, z_b right) contributes the series

    z_b^-2 * (1 - x) / (q (1 - x/q1)(1 - x/q2)(1 - q x)),   x = z_a / z_b,

expanded in nonnegative powers of x, and every right variable carries an
h-series tail h_n z_b^-n.  Right-factor degrees therefore drop without bound;
delta_truncated keeps the components whose second-factor degree stays within
`window` of the top.  The slope coproduct delta_mu is the finite top-degree
shadow of the same expansion and is computed by scaling limits.

The pairing takes a word (an iterated product of one-variable monomials) on
the left and an element on the right.  It is evaluated as an exact constant
term: clear the element to a Laurent numerator in inverted variables, expand
every kernel denominator as a geometric series in (smaller)/(larger), and
extract the coefficient of u_1^0 ... u_k^0.  A weight argument (w(u_i) = i,
every series factor starts strictly below weight zero and climbs in positive
steps) bounds the expansion orders, so the extraction is finite and exact.
"""

import math
from fractions import Fraction
from itertools import combinations, product

from .exactalg import (
    LaurentPoly,
    ParamScalar,
    PS_ONE,
    PS_ZERO,
    mpq,
)
from .shuffle_core import (
    ONE,
    ShuffleElement,
    TensorElement,
    ZERO,
    scaling_limit,
    shuffle_mul,
    tensor,
    tensor_shuffle_mul,
)
from .generators import (
    EpsilonVector,
    WordExpression,
    alpha,
    build_X_eps,
    build_P_recursive,
    word_to_element,
)


class WindowExceeded(ValueError):
    """An h-series operation needs data outside the declared window."""


# -- parameter-ring series ----------------------------------------------------


def alpha_poly(n: int) -> LaurentPoly:
    """The degree-n structure constant as a parameter Laurent polynomial."""
    if n < 1:
        raise ValueError("structure constants start at degree 1")
    q1n = LaurentPoly.param(1, 2 * n, 0) - LaurentPoly.const(1, 0)
    q2n = LaurentPoly.param(1, 0, n) - LaurentPoly.const(1, 0)
    qmn = LaurentPoly.param(1, -2 * n, -n) - LaurentPoly.const(1, 0)
    return (q1n * q2n * qmn).scale(mpq(1, n))


def _exp_series(coeff_fn, order: int) -> list:
    """Coefficients of exp(sum_{j>=1} coeff_fn(j) t^j) through t^order."""
    out = [PS_ONE]
    for m in range(1, order + 1):
        acc = None
        for j in range(1, m + 1):
            term = coeff_fn(j) * out[m - j] * ParamScalar.from_value(mpq(j, m))
            acc = term if acc is None else acc + term
        out.append(acc)
    return out


def omega_big_series(order: int) -> list:
    """Coefficients of the h-commutation series in x^0, x^-1, ..., x^-order."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    return _exp_series(lambda j: -alpha(j), order)


def omega_rational_series(order: int) -> list:
    """The same series from its closed rational form, expanded at x = infinity.

    Numerator roots q^-1, q1, q2 and denominator roots q, q1^-1, q2^-1, both
    rewritten in t = 1/x; the quotient is expanded by geometric series.
    """
    nums = [ParamScalar.q_power(-1), ParamScalar.q1_power(1), ParamScalar.q2_power(1)]
    dens = [ParamScalar.q_power(1), ParamScalar.q1_power(-1), ParamScalar.q2_power(-1)]
    series = [PS_ONE] + [PS_ONE * 0] * order
    for root in nums:
        # multiply by (1 - root t)
        for m in range(order, 0, -1):
            series[m] = series[m] - root * series[m - 1]
    for root in dens:
        # multiply by 1/(1 - root t) = sum_m root^m t^m
        out = []
        for m in range(order + 1):
            acc = series[m]
            for j in range(1, m + 1):
                acc = acc + (root**j) * series[m - j]
            out.append(acc)
        series = out
    return series


def h_weight_series(order: int) -> list:
    """Diagonal h-pairing values: coefficient n is the pairing of h_n with
    itself."""
    return _exp_series(alpha, order)


def power_sum(n: int, k: int) -> LaurentPoly:
    """The n-th power sum of k variables."""
    acc = LaurentPoly.zero(k)
    for i in range(k):
        acc = acc + LaurentPoly.z_var(i, k, n)
    return acc


def _partitions(n: int, cap: int | None = None) -> list:
    if n == 0:
        return [()]
    out = []
    top = n if cap is None else min(n, cap)
    for first in range(top, 0, -1):
        for rest in _partitions(n - first, first):
            out.append((first,) + rest)
    return out


def _aut(lam) -> int:
    out = 1
    run = 1
    for i in range(1, len(lam)):
        run = run + 1 if lam[i] == lam[i - 1] else 1
        if run > 1:
            out *= run
    return out


def omega_correction(r: int, k: int) -> LaurentPoly:
    """Degree-r symmetric correction picked up when a k-variable element
    moves past one h generator."""
    if r == 0:
        return LaurentPoly.const(1, k)
    acc = LaurentPoly.zero(k)
    for lam in _partitions(r):
        coeff = LaurentPoly.const(mpq((-1) ** len(lam), _aut(lam)), 0)
        for part in lam:
            coeff = coeff * alpha_poly(part)
        term = coeff.embed(k)
        for part in lam:
            term = term * power_sum(part, k)
        acc = acc + term
    return acc


# -- h-series elements --------------------------------------------------------


def _payload_shape(payload) -> tuple:
    if isinstance(payload, TensorElement):
        return ("t", payload.left_k, payload.right_k, payload.h0_pow)
    if isinstance(payload, ShuffleElement):
        return ("s", payload.k)
    raise TypeError(f"unsupported h-series payload {type(payload).__name__}")


class HSeriesElement:
    """Finite sum of terms h_{n_1} ... h_{n_r} * payload.

    Terms are keyed by the sorted tuple of h indices together with the
    payload shape; scalars are folded into the payloads.  `window` records
    the truncation depth the terms were computed to.
    """

    __slots__ = ("window", "terms")

    def __init__(self, window: int, terms: dict):
        self.window = window
        canon: dict = {}
        for (h_tuple, shape), payload in terms.items():
            if payload.is_zero:
                continue
            key = (tuple(sorted(h_tuple)), shape)
            prev = canon.get(key)
            canon[key] = payload if prev is None else prev + payload
        self.terms = canon

    @staticmethod
    def from_payload(payload, window: int) -> "HSeriesElement":
        return HSeriesElement(window, {((), _payload_shape(payload)): payload})

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, HSeriesElement):
            return NotImplemented
        if set(self.terms) != set(other.terms):
            return False
        return all(self.terms[k] == other.terms[k] for k in self.terms)

    def __hash__(self):  # pragma: no cover
        raise TypeError("HSeriesElement is unhashable; compare by equality")

    def __add__(self, other: "HSeriesElement") -> "HSeriesElement":
        if self.window != other.window:
            raise WindowExceeded("cannot combine h-series of different windows")
        out = dict(self.terms)
        for key, payload in other.terms.items():
            prev = out.get(key)
            out[key] = payload if prev is None else prev + payload
        return HSeriesElement(self.window, out)

    def __sub__(self, other: "HSeriesElement") -> "HSeriesElement":
        return self + other.scale(-1)

    def scale(self, value) -> "HSeriesElement":
        return HSeriesElement(
            self.window, {k: p.scale(value) for k, p in self.terms.items()}
        )

    def component(self, h_tuple, left_k: int | None = None):
        """The payload at a given h index multiset (and left weight, for
        tensor payloads); None when absent."""
        h_tuple = tuple(sorted(h_tuple))
        for (ht, shape), payload in self.terms.items():
            if ht != h_tuple:
                continue
            if left_k is not None and (shape[0] != "t" or shape[1] != left_k):
                continue
            return payload
        return None

    def serialize(self) -> str:
        blocks = [f"window={self.window}"]
        for (ht, shape) in sorted(self.terms, key=lambda k: (k[1], k[0])):
            payload = self.terms[(ht, shape)]
            h_text = ",".join(map(str, ht)) if ht else "-"
            blocks.append(f"h[{h_text}]\n{payload.serialize()}")
        return "\n--\n".join(blocks)

    def __repr__(self):  # pragma: no cover
        return f"<HSeriesElement window={self.window} terms={len(self.terms)}>"


# -- normal ordering ----------------------------------------------------------


def _mul_sym(P: ShuffleElement, poly: LaurentPoly, deg: int) -> ShuffleElement:
    # multiplying the numerator by a symmetric polynomial preserves validity
    return ShuffleElement(P.k, P.num * poly, P.den, P.d + deg)


def normal_order(h_part, P: ShuffleElement, window: int) -> HSeriesElement:
    """Rewrite P * h_{n_1} ... h_{n_r} with all h symbols on the left.

    Each pass of P through h_n trades h_n for h_{n-r} times a degree-r
    symmetric correction on P's variables, for r = 0..n.
    """
    h_part = tuple(h_part)
    if any(n < 0 for n in h_part):
        raise ValueError("negative h index")
    if any(n > window for n in h_part):
        raise WindowExceeded(f"h index beyond window {window}")
    shape = _payload_shape(P)
    terms = {((), shape): P}
    for n in sorted(h_part):
        new: dict = {}
        for (ht, _), payload in terms.items():
            for r in range(n + 1):
                bumped = _mul_sym(payload, omega_correction(r, P.k), r)
                key = (tuple(sorted(ht + (n - r,))), shape)
                prev = new.get(key)
                new[key] = bumped if prev is None else prev + bumped
        terms = new
    return HSeriesElement(window, terms)


def hecke_term(n: int) -> list:
    """The degree-n Cartan combination as (scalar, h index tuple) summands.

    h_0^n times the n-th log coefficient of the h series, cleared of h_0
    inverses; commuting it past an element multiplies the element by the
    n-th power sum of its variables.
    """
    if n < 1:
        raise ValueError("degree must be positive")
    inv_alpha = alpha(n).inverse()
    out = []
    for j in range(1, n + 1):
        coeff = inv_alpha * ParamScalar.from_value(mpq((-1) ** (j - 1), j))
        for comp in _compositions_positive(n, j):
            out.append((coeff, (0,) * (n - j) + tuple(sorted(comp))))
    return out


def _compositions_positive(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions_positive(total - first, parts - 1):
            yield (first,) + rest


def hecke_check(n: int, P: ShuffleElement, window: int) -> bool:
    """Commuting the degree-n Cartan combination past P multiplies P by the
    n-th power sum, with n grouplike markers attached."""
    left = None
    right = None
    for coeff, ht in hecke_term(n):
        lt = HSeriesElement(window, {((ht), _payload_shape(P)): P.scale(coeff)})
        rt = normal_order(ht, P, window).scale(coeff)
        left = lt if left is None else left + lt
        right = rt if right is None else right + rt
    commutator = left - right
    expected_payload = _mul_sym(P, power_sum(n, P.k), n)
    expected = HSeriesElement(
        window, {((0,) * n, _payload_shape(P)): expected_payload}
    )
    return commutator == expected


# -- the coproduct ------------------------------------------------------------

_CROSS_CONV: list = []
_CROSS_COEFFS: list = []


def _conv3(j: int) -> LaurentPoly:
    # convolution of the three geometric factors at total degree j
    while len(_CROSS_CONV) <= j:
        jj = len(_CROSS_CONV)
        acc = LaurentPoly.zero(0)
        for e1 in range(jj + 1):
            for e2 in range(jj + 1 - e1):
                e3 = jj - e1 - e2
                acc = acc + LaurentPoly.param(1, -2 * e1 + 2 * e3, -e2 + e3)
        _CROSS_CONV.append(acc)
    return _CROSS_CONV[j]


def _cross_coeff(m: int) -> LaurentPoly:
    """Coefficient of x^m in (1 - x) / (q (1 - x/q1)(1 - x/q2)(1 - q x))."""
    while len(_CROSS_COEFFS) <= m:
        j = len(_CROSS_COEFFS)
        acc = _conv3(j)
        if j >= 1:
            acc = acc - _conv3(j - 1)
        _CROSS_COEFFS.append(acc.shift(-2, -1))
    return _CROSS_COEFFS[m]


def _right_zdeg(exp: tuple, right_vars) -> int:
    return sum(exp[2 + b] for b in right_vars)


def _split_expansion(
    num: LaurentPoly, lo: int, split: int, hi: int, min_right_zdeg: int
) -> dict:
    """Cross-pair and h-tail expansion for splitting variables lo..split-1
    against split..hi-1; variables outside the range are spectators.

    Returns a map from sorted h index tuples (one index per right variable)
    to joint numerators, keeping monomials whose right-part z-degree stays
    at or above min_right_zdeg.
    """
    k = num.var_count
    right_vars = range(split, hi)
    cross = [(a, b) for a in range(lo, split) for b in right_vars]
    cur = num
    for idx, (a, b) in enumerate(cross):
        remaining = len(cross) - idx - 1
        acc = LaurentPoly.zero(k)
        m = 0
        while True:
            floor = min_right_zdeg + m + 2 + 2 * remaining
            live = {
                e: c
                for e, c in cur.terms.items()
                if _right_zdeg(e, right_vars) >= floor
            }
            if not live:
                break
            shift = [0] * k
            shift[a] += m
            shift[b] -= m + 2
            piece = LaurentPoly(live, k).shift(z_exps=shift)
            acc = acc + piece * _cross_coeff(m).embed(k)
            m += 1
        cur = acc
        if cur.is_zero:
            return {}
    layers = {(): cur}
    for b in right_vars:
        new: dict = {}
        for ht, poly in layers.items():
            n = 0
            while True:
                live = {
                    e: c
                    for e, c in poly.terms.items()
                    if _right_zdeg(e, right_vars) >= min_right_zdeg + n
                }
                if not live:
                    break
                shift = [0] * k
                shift[b] = -n
                piece = LaurentPoly(live, k).shift(z_exps=shift)
                key = ht + (n,)
                prev = new.get(key)
                new[key] = piece if prev is None else prev + piece
                n += 1
        layers = new
    out: dict = {}
    for ht, poly in layers.items():
        kept = {
            e: c
            for e, c in poly.terms.items()
            if _right_zdeg(e, right_vars) >= min_right_zdeg
        }
        if not kept:
            continue
        poly = LaurentPoly(kept, k)
        key = tuple(sorted(ht))
        prev = out.get(key)
        out[key] = poly if prev is None else prev + poly
    return out


def delta_truncated(P: ShuffleElement, window: int) -> HSeriesElement:
    """All coproduct components of P whose second-factor degree is at least
    d - window, as h-series terms over tensor payloads."""
    if window < 0:
        raise WindowExceeded("window must be nonnegative")
    terms: dict = {}
    if P.is_zero:
        return HSeriesElement(window, terms)
    k, d = P.k, P.d
    for i in range(k + 1):
        m = k - i
        bound = (d - window) + m * (m - 1)
        for ht, poly in _split_expansion(P.num, 0, i, k, bound).items():
            payload = TensorElement(i, m, poly, P.den, 0)
            terms[(ht, _payload_shape(payload))] = payload
    return HSeriesElement(window, terms)


def delta_mu(P: ShuffleElement, mu) -> list:
    """The slope-mu coproduct: k + 1 scaling limits, the split-i entry
    carrying k - i grouplike markers on its left leg."""
    return [scaling_limit(P, i, mu) for i in range(P.k + 1)]


def tensor_right_slice(T: TensorElement, d2: int) -> TensorElement:
    """The monomials of T whose right-leg degree equals d2."""
    rk = T.right_k
    target = d2 + rk * (rk - 1)
    keep = {
        e: c
        for e, c in T.joint_num.terms.items()
        if sum(e[2 + T.left_k :]) == target
    }
    return TensorElement(
        T.left_k, rk, LaurentPoly(keep, T.left_k + rk), T.den, T.h0_pow
    )


def strip_h0(T: TensorElement) -> TensorElement:
    return TensorElement(T.left_k, T.right_k, T.joint_num, T.den, 0)


def hseries_filter(hse: HSeriesElement, min_d2: int) -> HSeriesElement:
    """Drop tensor-payload monomials below the stated second-factor degree."""
    out: dict = {}
    for (ht, shape), payload in hse.terms.items():
        if shape[0] != "t":
            out[(ht, shape)] = payload
            continue
        rk = payload.right_k
        floor = min_d2 + rk * (rk - 1)
        keep = {
            e: c
            for e, c in payload.joint_num.terms.items()
            if sum(e[2 + payload.left_k :]) >= floor
        }
        trimmed = TensorElement(
            payload.left_k,
            rk,
            LaurentPoly(keep, payload.left_k + rk),
            payload.den,
            payload.h0_pow,
        )
        out[(ht, shape)] = trimmed
    return HSeriesElement(hse.window, out)


def _embed_on_vars(poly: LaurentPoly, positions, total: int) -> LaurentPoly:
    """Re-seat a polynomial's variables onto the given slots of a larger
    variable set."""
    out: dict = {}
    for e, c in poly.terms.items():
        z = [0] * total
        for local, target in enumerate(positions):
            z[target] = e[2 + local]
        out[(e[0], e[1], *z)] = c
    return LaurentPoly(out, total)


def hseries_mul(X: HSeriesElement, Y: HSeriesElement) -> HSeriesElement:
    """Product of two h-series with tensor payloads.

    The left factor's left leg is commuted past the right factor's h
    symbols (collecting symmetric corrections), then the legs multiply
    pairwise.
    """
    if X.window != Y.window:
        raise WindowExceeded("cannot multiply h-series of different windows")
    out: dict = {}
    for (ht1, shape1), T1 in X.terms.items():
        if shape1[0] != "t":
            raise TypeError("hseries_mul needs tensor payloads")
        lk = T1.left_k
        total = lk + T1.right_k
        for (ht2, shape2), T2 in Y.terms.items():
            if shape2[0] != "t":
                raise TypeError("hseries_mul needs tensor payloads")
            for r_vec in product(*[range(n + 1) for n in ht2]):
                corrected = T1.joint_num
                for r in r_vec:
                    corrected = corrected * _embed_on_vars(
                        omega_correction(r, lk), range(lk), total
                    )
                T1c = TensorElement(lk, T1.right_k, corrected, T1.den, T1.h0_pow)
                payload = tensor_shuffle_mul(T1c, T2)
                ht = tuple(
                    sorted(ht1 + tuple(n - r for n, r in zip(ht2, r_vec)))
                )
                key = (ht, _payload_shape(payload))
                prev = out.get(key)
                out[key] = payload if prev is None else prev + payload
    return HSeriesElement(X.window, out)


def check_delta_multiplicative(
    P: ShuffleElement, Q: ShuffleElement, window: int
) -> bool:
    """Within the window, the coproduct of a product is the product of the
    coproducts.  Both sides are filtered to second-factor degree at least
    d(P) + d(Q) - window before comparison."""
    lhs = delta_truncated(shuffle_mul(P, Q), window)
    rhs = hseries_mul(delta_truncated(P, window), delta_truncated(Q, window))
    floor = P.d + Q.d - window
    return hseries_filter(lhs, floor) == hseries_filter(rhs, floor)


# -- coassociativity ----------------------------------------------------------


def _h_splits(ht: tuple):
    """All ways to split each h index n into an ordered pair (p, n - p)."""
    choices = [[(p, n - p) for p in range(n + 1)] for n in ht]
    for pick in product(*choices):
        left = tuple(sorted(p for p, _ in pick))
        right = tuple(sorted(q for _, q in pick))
        yield left, right


def _triple_filter(terms: dict, k: int, d: int, window: int) -> dict:
    """Restrict triple-split terms to the window-safe region.

    A term survives when both composition orders would certainly have kept
    it: third-leg degree and the right pair degree stay within `window` of
    the top, and the first leg (with its h weight) and middle leg (with its
    h weight) stay within `window` of the bottom.
    """
    out: dict = {}
    for key, poly in terms.items():
        i1, i2, ht_a, ht_b = key
        i3 = k - i1 - i2
        wa, wb = sum(ht_a), sum(ht_b)
        keep: dict = {}
        for e, c in poly.terms.items():
            d1 = sum(e[2 : 2 + i1]) - i1 * (i1 - 1)
            d2 = sum(e[2 + i1 : 2 + i1 + i2]) - i2 * (i2 - 1)
            d3 = sum(e[2 + i1 + i2 :]) - i3 * (i3 - 1)
            if (
                d3 >= d - window
                and d2 + d3 + wb >= d - window
                and d1 + wa <= window
                and d2 + wb <= window
            ):
                keep[e] = c
        if keep:
            block = LaurentPoly(keep, k)
            prev = out.get(key)
            out[key] = block if prev is None else prev + block
    return out


def check_coassociativity(P: ShuffleElement, window: int) -> bool:
    """Both orders of iterating the coproduct agree on the window-safe
    region of the triple splitting."""
    k, d = P.k, P.d
    if P.is_zero:
        return True

    def accumulate(store, key, poly):
        prev = store.get(key)
        store[key] = poly if prev is None else prev + poly

    # split first at i (outer), then split the left group at i1
    side_a: dict = {}
    for i in range(k + 1):
        m = k - i
        bound1 = (d - window) + m * (m - 1)
        stage1 = _split_expansion(P.num, 0, i, k, bound1)
        for ht, poly in stage1.items():
            d3_max = (
                max(sum(e[2 + i :]) for e in poly.terms) - m * (m - 1)
                if poly.terms
                else 0
            )
            for i1 in range(i + 1):
                i2 = i - i1
                bound2 = (
                    (d - window - d3_max - sum(ht)) + i2 * (i2 - 1)
                )
                stage2 = _split_expansion(poly, 0, i1, i, bound2)
                for ht_new, poly2 in stage2.items():
                    for ht_p, ht_q in _h_splits(ht):
                        key = (
                            i1,
                            i2,
                            tuple(sorted(ht_new + ht_p)),
                            ht_q,
                        )
                        accumulate(side_a, key, poly2)

    # split first at i1 (outer), then split the right group at i1 + i2
    side_b: dict = {}
    for i1 in range(k + 1):
        m = k - i1
        bound1 = (d - window) + m * (m - 1)
        stage1 = _split_expansion(P.num, 0, i1, k, bound1)
        for ht, poly in stage1.items():
            for i2 in range(m + 1):
                i3 = m - i2
                bound2 = (d - window) + i3 * (i3 - 1)
                stage2 = _split_expansion(poly, i1, i1 + i2, k, bound2)
                for ht_new, poly2 in stage2.items():
                    key = (i1, i2, ht, ht_new)
                    accumulate(side_b, key, poly2)

    fa = _triple_filter(side_a, k, d, window)
    fb = _triple_filter(side_b, k, d, window)
    if set(fa) != set(fb):
        return False
    return all(fa[key] == fb[key] for key in fa)


# -- the slope coproduct of staircase elements --------------------------------


def _piece_element(a: int, b: int, bits) -> ShuffleElement:
    text = "".join(str(x) for x in bits)
    return build_X_eps(EpsilonVector(a, b, len(bits) + 1, text))


def _shuffle_fold(elements) -> ShuffleElement:
    acc = ONE
    for e in elements:
        acc = shuffle_mul(acc, e)
    return acc


def check_expdelta(a: int, b: int, n: int) -> list:
    """Compare the slope coproduct of every staircase element on the ray
    (a, b) of total height n against its closed interval-splitting form.

    Returns a list of failure descriptions; empty means agreement.
    """
    failures = []
    mu = Fraction(b, a)
    k = n * a
    for bits in product((0, 1), repeat=n - 1):
        eps = list(bits)
        element = _piece_element(a, b, eps)
        got = delta_mu(element, mu)
        expected: dict = {k: tensor(element, ONE, 0)}
        u_choices = [0] + [i for i in range(1, n) if eps[i - 1] == 1]
        v_choices = [i for i in range(1, n) if eps[i - 1] == 0] + [n]
        chains = []

        def grow(min_next, acc):
            for u in u_choices:
                if u < min_next:
                    continue
                for v in v_choices:
                    if v <= u:
                        continue
                    chain = acc + [(u, v)]
                    chains.append(chain)
                    grow(v + 1, chain)

        grow(0, [])
        for chain in chains:
            t = len(chain)
            left_bits = []
            if chain[0][0] > 0:
                left_bits.append(eps[0 : chain[0][0] - 1])
            for (u, v), (u2, _) in zip(chain, chain[1:]):
                left_bits.append(eps[v : u2 - 1])
            if chain[-1][1] < n:
                left_bits.append(eps[chain[-1][1] :])
            right_bits = [eps[u : v - 1] for u, v in chain]
            left = _shuffle_fold(_piece_element(a, b, s) for s in left_bits)
            right = _shuffle_fold(_piece_element(a, b, s) for s in right_bits)
            exponent = -t + (1 if chain[0][0] == 0 else 0)
            coeff = ParamScalar.q_power(exponent)
            if exponent % 2:
                coeff = coeff * ParamScalar.from_value(-1)
            h0p = a * sum(v - u for u, v in chain)
            term = tensor(left, right, h0p).scale(coeff)
            if left.k != k - h0p:
                failures.append(f"eps={eps} chain={chain}: weight bookkeeping")
                continue
            prev = expected.get(left.k)
            expected[left.k] = term if prev is None else prev + term
        for i in range(k + 1):
            want = expected.get(i)
            have = got[i]
            if want is None or want.is_zero:
                if not (have is ZERO or have.is_zero):
                    failures.append(f"eps={eps} split={i}: expected zero")
                continue
            if have is ZERO or have.is_zero:
                failures.append(f"eps={eps} split={i}: got zero")
                continue
            if strip_h0(have) != strip_h0(want) or have.h0_pow != want.h0_pow:
                failures.append(f"eps={eps} split={i}: mismatch")
    return failures


# -- the constant-term pairing ------------------------------------------------


def _ct_engine(group_sizes, words, num: LaurentPoly) -> LaurentPoly:
    """Constant term of the normal-ordered pairing integrand.

    Per group: a monomial bump of each word exponent by 2(k_g - 1), the
    group's difference product, and geometric expansions of the three kernel
    families in the dominance region where earlier variables are larger.
    Returns the accumulated parameter polynomial.
    """
    K = sum(group_sizes)
    if num.var_count != K:
        raise ValueError("numerator variable count mismatch")
    inverted = LaurentPoly(
        {(e[0], e[1], *[-x for x in e[2:]]): c for e, c in num.terms.items()}, K
    )
    poly = inverted
    weights = [0] * K
    factors = []
    offset = 0
    for g, word in zip(group_sizes, words):
        if len(word) != g:
            raise ValueError("word length does not match group size")
        bump = [0] * K
        for i in range(g):
            weights[offset + i] = i + 1
            bump[offset + i] = word[i] + 2 * (g - 1)
        poly = poly * LaurentPoly.monomial(1, 0, 0, bump)
        for i, j in combinations(range(g), 2):
            diff = LaurentPoly.zero(K)
            zi = [0] * K
            zi[offset + i] = 1
            zj = [0] * K
            zj[offset + j] = 1
            diff = LaurentPoly.monomial(1, 0, 0, zi) - LaurentPoly.monomial(
                1, 0, 0, zj
            )
            poly = poly * diff
            # 1/(u_i - q1 u_j) and 1/(u_i - q2 u_j): u_i dominates
            factors.append((offset + i, offset + j, (0, 0), (2, 0), 1))
            factors.append((offset + i, offset + j, (0, 0), (0, 1), 1))
            # 1/(u_j' - q u_i') for the reversed pair: u_i' dominates
            factors.append((offset + i, offset + j, (-2, -1), (-2, -1), -1))
        offset += g
    suffix_min = [0] * (len(factors) + 1)
    for t in range(len(factors) - 1, -1, -1):
        big = factors[t][0]
        suffix_min[t] = suffix_min[t + 1] - weights[big]
    cur = dict(poly.terms)
    for t, (big, small, base, step, sign) in enumerate(factors):
        delta_w = weights[small] - weights[big]
        assert delta_w > 0
        new: dict = {}
        for e, c in cur.items():
            we = sum(weights[v] * e[2 + v] for v in range(K))
            ceiling = -we + weights[big] - suffix_min[t + 1]
            if ceiling < 0:
                continue
            m_max = ceiling // delta_w
            for m in range(m_max + 1):
                exp = list(e)
                exp[0] += base[0] + m * step[0]
                exp[1] += base[1] + m * step[1]
                exp[2 + small] += m
                exp[2 + big] -= m + 1
                key = tuple(exp)
                coeff = c if sign > 0 else -c
                prev = new.get(key)
                if prev is None:
                    new[key] = coeff
                else:
                    prev = prev + coeff
                    if prev:
                        new[key] = prev
                    else:
                        del new[key]
        cur = new
    out: dict = {}
    for e, c in cur.items():
        if any(e[2:]):
            continue
        key = (e[0], e[1])
        prev = out.get(key)
        if prev is None:
            out[key] = c
        else:
            prev = prev + c
            if prev:
                out[key] = prev
            else:
                del out[key]
    return LaurentPoly(out, 0)


def _pair_single_word(word, P: ShuffleElement) -> ParamScalar:
    k = P.k
    if len(word) != k:
        raise ValueError("word length must match the element's weight")
    if P.is_zero:
        return PS_ZERO
    if k == 0:
        return ParamScalar.from_poly(P.num, P.den)
    ct = _ct_engine([k], [tuple(word)], P.num)
    sign = -1 if (k * (k - 1) // 2) % 2 else 1
    value = ParamScalar.from_poly(ct) * ParamScalar.from_value(sign)
    return value / (alpha(1) ** k) / ParamScalar.from_poly(P.den)


def pair_word_element(w, P: ShuffleElement) -> ParamScalar:
    """Pairing of a word (or word expression) against an element."""
    if isinstance(w, WordExpression):
        acc = PS_ZERO
        for word, coeff in w.terms.items():
            acc = acc + coeff * _pair_single_word(word, P)
        return acc
    return _pair_single_word(tuple(w), P)


# -- pairing of h monomials ---------------------------------------------------


def _h_monomial_p_expansion(multiset) -> dict:
    """Expansion of a product of h generators over power-sum partitions."""
    out = {(): PS_ONE}
    for n in multiset:
        if n == 0:
            continue
        new: dict = {}
        for lam in _partitions(n):
            coeff = ParamScalar.from_value(mpq(1, _aut(lam)))
            for part in lam:
                coeff = coeff * alpha(part)
            for prev_lam, prev_coeff in out.items():
                key = tuple(sorted(prev_lam + lam, reverse=True))
                term = prev_coeff * coeff
                acc = new.get(key)
                new[key] = term if acc is None else acc + term
        out = new
    return out


def pair_h_monomials(A, B) -> ParamScalar:
    """Pairing of two h monomials; grouplike markers are transparent."""
    ca = _h_monomial_p_expansion(A)
    cb = _h_monomial_p_expansion(B)
    acc = PS_ZERO
    for lam, coeff_a in ca.items():
        coeff_b = cb.get(lam)
        if coeff_b is None:
            continue
        norm = PS_ONE
        i = 0
        while i < len(lam):
            j = i
            while j < len(lam) and lam[j] == lam[i]:
                j += 1
            mult = j - i
            norm = norm * ParamScalar.from_value(math.factorial(mult)) * (
                alpha(lam[i]).inverse() ** mult
            )
            i = j
        acc = acc + coeff_a * coeff_b * norm
    return acc


def pair_tensor_words(word_a, word_b, h_tuple, T: TensorElement) -> ParamScalar:
    """Pairing of a pure tensor of words against one h-series component.

    The h symbols are traded against lowerings of the left word's exponents,
    then both legs pair jointly through the shared numerator.
    """
    ka, kb = len(word_a), len(word_b)
    if T.left_k != ka or T.right_k != kb:
        raise ValueError("component shape does not match the words")
    total_h = sum(h_tuple)
    acc = PS_ZERO
    if ka == 0 and total_h > 0:
        return acc
    vectors = (
        [()]
        if ka == 0
        else [
            vec
            for vec in product(range(total_h + 1), repeat=ka)
            if sum(vec) == total_h
        ]
    )
    for vec in vectors:
        weight = pair_h_monomials(vec, h_tuple)
        if weight.is_zero:
            continue
        lowered = tuple(x - m for x, m in zip(word_a, vec))
        ct = _ct_engine([ka, kb], [lowered, tuple(word_b)], T.joint_num)
        sign = (-1) ** ((ka * (ka - 1) // 2 + kb * (kb - 1) // 2) % 2)
        value = (
            ParamScalar.from_poly(ct)
            * ParamScalar.from_value(sign)
            / (alpha(1) ** (ka + kb))
            / ParamScalar.from_poly(T.den)
        )
        acc = acc + weight * value
    return acc


def pair_words_against_delta(word_a, word_b, hse: HSeriesElement) -> ParamScalar:
    """Pairing of word_a (x) word_b against a truncated coproduct."""
    acc = PS_ZERO
    for (ht, shape), payload in hse.terms.items():
        if shape[0] != "t":
            continue
        if payload.left_k != len(word_a) or payload.right_k != len(word_b):
            continue
        acc = acc + pair_tensor_words(word_a, word_b, ht, payload)
    return acc


def check_bialgebra_pairing(word_a, word_b, word_c, window: int) -> bool:
    """The pairing turns concatenation into the coproduct."""
    concat = tuple(word_a) + tuple(word_b)
    C = word_to_element(word_c)
    lhs = pair_word_element(concat, C)
    rhs = pair_words_against_delta(word_a, word_b, delta_truncated(C, window))
    return lhs == rhs


# -- orthogonality ------------------------------------------------------------


def collection_word(collection) -> WordExpression:
    """Concatenated word form of a collection, in the product order used by
    collection_product: slope then weight, increasing."""
    parts = sorted(collection, key=lambda kd: (Fraction(kd[1], kd[0]), kd[0]))
    acc = None
    for k_i, d_i in parts:
        word, _ = build_P_recursive(k_i, d_i)
        acc = word if acc is None else acc.concat(word)
    return acc if acc is not None else WordExpression.from_word(())


def gram_check(collections) -> dict:
    """Pairing matrix of the collection basis at a fixed bidegree.

    Expects the matrix to be diagonal with entry prod(mult_j!) over repeated
    parts times prod over parts of the inverse structure constant at the
    part's gcd.
    """
    from .hall_geometry import collection_product

    words = [collection_word(c) for c in collections]
    elements = [collection_product(c) for c in collections]
    entries = []
    ok = True
    for i, wi in enumerate(words):
        for j, ej in enumerate(elements):
            value = pair_word_element(wi, ej)
            if i == j:
                parts = sorted(collections[i])
                expected = PS_ONE
                run = 1
                for t, part in enumerate(parts):
                    run = run + 1 if t and part == parts[t - 1] else 1
                    expected = expected * ParamScalar.from_value(run)
                    g = math.gcd(part[0], abs(part[1]))
                    expected = expected * alpha(g).inverse()
            else:
                expected = PS_ZERO
            match = value == expected
            ok = ok and match
            entries.append(
                {
                    "row": i,
                    "col": j,
                    "value": value.canonical_text(),
                    "expected": expected.canonical_text(),
                    "ok": match,
                }
            )
    return {"ok": ok, "entries": entries}
