"""Identity checks at weights where dict-backed polynomials do not fit.

Weight-six staircase numerators run to about five million terms; a Python
dict that size costs gigabytes and the identities here need several such
polynomials at once.  Every intermediate therefore stays inside the native
engine, and only collapsed two-parameter values and boolean outcomes cross
back into Python.  Checks are sequenced so at most one heavy transient is
alive next to one small accumulator.
"""

from .exactalg import LaurentPoly, ParamScalar
from .generators import EpsilonVector
from .phi_map import phi_value
from . import accel


def _require_native():
    if not accel.AVAILABLE:
        raise RuntimeError("heavy-weight checks need the native engine")


def _rationalize(handle, k):
    """Copy an integer-engine handle into the rational engine."""
    if isinstance(handle, accel._fastcore.Poly):
        return handle
    return accel._fastcore.Poly.from_terms(
        k + 2, [(e, str(c)) for e, c in handle.to_terms()]
    )


def _aligned(a, b, k):
    if type(a) is type(b):
        return a, b
    return _rationalize(a, k), _rationalize(b, k)


def _q_shift(handle, k, e):
    """Multiply by the e-th power of the product parameter in place."""
    handle.shift_ip([2 * e, e] + [0] * k)


def _x_handle(e: EpsilonVector):
    return accel.x_divided_auto(e.m_vector())


def check_concat_native(e1: EpsilonVector, e2: EpsilonVector) -> bool:
    """Two-term concatenation rule on staircase numerators, kept native.

    The product of the two staircase elements must equal the zero-joined
    staircase minus q times the one-joined staircase; all four elements have
    unit denominators, so this is a numerator identity.
    """
    _require_native()
    if (e1.a, e1.b) != (e2.a, e2.b):
        raise ValueError("concatenation needs a common ray")
    a, b = e1.a, e1.b
    k = e1.k + e2.k
    acc = accel.product_divided(_x_handle(e1), _x_handle(e2), e1.k, e2.k)
    joined = EpsilonVector(a, b, e1.n + e2.n, e1.bits + "0" + e2.bits)
    x0 = _x_handle(joined)
    acc, x0 = _aligned(acc, x0, k)
    acc.isub(x0)
    del x0
    x1 = _x_handle(EpsilonVector(a, b, e1.n + e2.n, e1.bits + "1" + e2.bits))
    _q_shift(x1, k, 1)
    acc, x1 = _aligned(acc, x1, k)
    acc.iadd(x1)
    return acc.is_zero()


def check_drag_native(a: int, b: int, t: int) -> bool:
    """All-zeros minus q^(t-1) all-ones staircase against the telescoping
    sum of split products, kept native.

    The right side runs over splits r + s = t - 2 with weight q^s; each term
    is the product of the all-zeros staircase on r separators with the
    all-ones staircase on s separators.
    """
    _require_native()
    if t < 2:
        raise ValueError("the identity needs t >= 2")
    k = t * a
    acc = None
    for r in range(t - 1):
        s = t - 2 - r
        e1 = EpsilonVector(a, b, r + 1, "0" * r)
        e2 = EpsilonVector(a, b, s + 1, "1" * s)
        term = accel.product_divided(_x_handle(e1), _x_handle(e2), e1.k, e2.k)
        _q_shift(term, k, s)
        if acc is None:
            acc = term
        else:
            acc, term = _aligned(acc, term, k)
            acc.iadd(term)
        del term
    x0 = _x_handle(EpsilonVector(a, b, t, "0" * (t - 1)))
    acc, x0 = _aligned(acc, x0, k)
    acc.isub(x0)
    del x0
    x1 = _x_handle(EpsilonVector(a, b, t, "1" * (t - 1)))
    _q_shift(x1, k, t - 1)
    acc, x1 = _aligned(acc, x1, k)
    acc.iadd(x1)
    return acc.is_zero()


def phi_staircase_native(e: EpsilonVector) -> ParamScalar:
    """Evaluation-map value of a staircase element without leaving the
    native engine until the two-parameter collapse."""
    _require_native()
    k = e.k
    h = _x_handle(e)
    collapsed = h.eval_powers([-2 * (i + 1) for i in range(k)], [0] * k)
    value = accel.from_native(collapsed, 0)
    return phi_value(k, e.d, value, LaurentPoly.const(1, 0))


def staircase_combo_is_zero(a: int, b: int, n: int, coeffs) -> bool:
    """Whether sum_r coeffs[r] * X^(0..01..1 with r ones) vanishes.

    coeffs are parameter-only Laurent polynomials (denominators already
    cleared by the caller).  Strings with an exactly zero coefficient are
    skipped, so a combination that cancels symbolically never builds the
    heavy numerators at all.
    """
    _require_native()
    k = n * a
    acc = None
    for r, c in enumerate(coeffs):
        if c.is_zero:
            continue
        x = _x_handle(EpsilonVector(a, b, n, "0" * (n - 1 - r) + "1" * r))
        terms = sorted(c.terms.items())
        if any(v != int(v) for _, v in terms):
            x = _rationalize(x, k)
        integral = isinstance(x, accel._fastcore.IPoly)
        if len(terms) == 1:
            (se, qe), coeff = terms[0]
            x.shift_ip([se, qe] + [0] * k)
            x.scale_ip(int(coeff) if integral else str(coeff))
        else:
            w = type(x).from_terms(
                k + 2,
                [
                    ((se, qe) + (0,) * k, int(cf) if integral else str(cf))
                    for (se, qe), cf in terms
                ],
            )
            x = x.mul(w)
        if acc is None:
            acc = x
        else:
            acc, x = _aligned(acc, x, k)
            acc.iadd(x)
        del x
    return acc is None or acc.is_zero()
