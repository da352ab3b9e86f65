"""Exact sparse Laurent-polynomial arithmetic in the parameters s, q2 and
variables z1..zk, plus the scalar fraction field built on top of it.

A polynomial is a map from exponent tuples to nonzero rationals.  The
exponent tuple is (s_exp, q2_exp, z1_exp, ..., zk_exp), so it has length
var_count + 2; all exponents may be negative.  The parameter s tracks the
square root of q1 (s*s = q1), and q means q1*q2 = s^2 * q2 throughout.

Everything is exact: coefficients are gmpy2.mpq (fractions.Fraction when
gmpy2 is unavailable), no floating point anywhere.  Values are immutable
after construction and safe to share across threads.
"""

from __future__ import annotations

import heapq
import math
import operator
from typing import Iterable, Mapping, Sequence

try:
    from gmpy2 import mpq
except ImportError:  # pragma: no cover
    from fractions import Fraction as mpq

QONE = mpq(1)
QZERO = mpq(0)


class NonExactDivision(ArithmeticError):
    """Raised when exact_div meets a nonzero remainder.

    This always signals a broken algebraic identity upstream; callers must
    never truncate past it.
    """


class VariableCountMismatch(ValueError):
    pass


def _as_mpq(value) -> mpq:
    return value if isinstance(value, type(QONE)) else mpq(value)


class LaurentPoly:
    """Immutable sparse Laurent polynomial in s, q2, z1..zk."""

    __slots__ = ("terms", "var_count")

    def __init__(self, terms: Mapping[tuple, object], var_count: int):
        self.terms = {e: c for e, c in terms.items() if c}
        self.var_count = var_count

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(var_count: int) -> "LaurentPoly":
        return LaurentPoly({}, var_count)

    @staticmethod
    def const(value, var_count: int) -> "LaurentPoly":
        c = _as_mpq(value)
        if not c:
            return LaurentPoly.zero(var_count)
        return LaurentPoly({(0,) * (var_count + 2): c}, var_count)

    @staticmethod
    def monomial(coeff, s_exp: int, q2_exp: int, z_exps: Sequence[int]) -> "LaurentPoly":
        c = _as_mpq(coeff)
        var_count = len(z_exps)
        if not c:
            return LaurentPoly.zero(var_count)
        return LaurentPoly({(s_exp, q2_exp, *z_exps): c}, var_count)

    @staticmethod
    def z_var(index: int, var_count: int, power: int = 1) -> "LaurentPoly":
        """The monomial z_{index+1}^power (index is 0-based)."""
        exps = [0] * var_count
        exps[index] = power
        return LaurentPoly.monomial(QONE, 0, 0, exps)

    @staticmethod
    def param(coeff, s_exp: int, q2_exp: int, var_count: int = 0) -> "LaurentPoly":
        return LaurentPoly.monomial(coeff, s_exp, q2_exp, (0,) * var_count)

    # -- predicates and views ----------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, LaurentPoly)
            and self.var_count == other.var_count
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.var_count, frozenset(self.terms.items())))

    def z_degrees(self) -> set:
        """Set of total z-degrees across the support (empty for 0)."""
        return {sum(e[2:]) for e in self.terms}

    def leading_key(self) -> tuple:
        return max(self.terms)

    def trailing_key(self) -> tuple:
        return min(self.terms)

    # -- ring operations ----------------------------------------------------

    def _check(self, other: "LaurentPoly"):
        if self.var_count != other.var_count:
            raise VariableCountMismatch(
                f"var_count {self.var_count} != {other.var_count}"
            )

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            acc = out.get(e)
            if acc is None:
                out[e] = c
            else:
                acc = acc + c
                if acc:
                    out[e] = acc
                else:
                    del out[e]
        return LaurentPoly(out, self.var_count)

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            acc = out.get(e)
            if acc is None:
                out[e] = -c
            else:
                acc = acc - c
                if acc:
                    out[e] = acc
                else:
                    del out[e]
        return LaurentPoly(out, self.var_count)

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly({e: -c for e, c in self.terms.items()}, self.var_count)

    def __mul__(self, other: "LaurentPoly") -> "LaurentPoly":
        self._check(other)
        a, b = self.terms, other.terms
        if len(a) > len(b):
            a, b = b, a
        out: dict = {}
        add = operator.add
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = tuple(map(add, ea, eb))
                acc = out.get(e)
                if acc is None:
                    out[e] = ca * cb
                else:
                    acc = acc + ca * cb
                    if acc:
                        out[e] = acc
                    else:
                        del out[e]
        return LaurentPoly(out, self.var_count)

    def scale(self, coeff) -> "LaurentPoly":
        c = _as_mpq(coeff)
        if not c:
            return LaurentPoly.zero(self.var_count)
        return LaurentPoly({e: c * v for e, v in self.terms.items()}, self.var_count)

    def shift(self, s_exp: int = 0, q2_exp: int = 0, z_exps: Sequence[int] = ()) -> "LaurentPoly":
        """Multiply by the monomial s^s_exp q2^q2_exp z^z_exps."""
        zs = tuple(z_exps) if z_exps else (0,) * self.var_count
        delta = (s_exp, q2_exp, *zs)
        add = operator.add
        return LaurentPoly(
            {tuple(map(add, e, delta)): c for e, c in self.terms.items()},
            self.var_count,
        )

    def embed(self, var_count: int) -> "LaurentPoly":
        """Reinterpret a parameter-only (k = 0) polynomial in k variables."""
        if self.var_count != 0:
            raise VariableCountMismatch("embed expects a parameter-only polynomial")
        pad = (0,) * var_count
        return LaurentPoly({e + pad: c for e, c in self.terms.items()}, var_count)

    # -- serialization -------------------------------------------------------

    def canonical_text(self) -> str:
        """Bit-exact fixture format: sorted terms `c * s^a q2^b z1^c1 ...`."""
        if not self.terms:
            return "0"
        names = ["s", "q2"] + [f"z{i+1}" for i in range(self.var_count)]
        parts = []
        for e in sorted(self.terms):
            c = self.terms[e]
            num, den = c.numerator, c.denominator
            coeff = str(num) if den == 1 else f"{num}/{den}"
            body = " ".join(f"{n}^{x}" for n, x in zip(names, e))
            parts.append(f"{coeff} * {body}")
        return " + ".join(parts)

    def __repr__(self):  # pragma: no cover
        return f"LaurentPoly({self.canonical_text()!r}, k={self.var_count})"


def parse_poly(text: str, var_count: int) -> LaurentPoly:
    """Inverse of canonical_text."""
    text = text.strip()
    if text == "0":
        return LaurentPoly.zero(var_count)
    terms = {}
    for part in text.split(" + "):
        coeff_s, body = part.split(" * ")
        exps = []
        for field in body.split(" "):
            _, _, x = field.partition("^")
            exps.append(int(x))
        if len(exps) != var_count + 2:
            raise ValueError(f"expected {var_count + 2} exponents in {part!r}")
        terms[tuple(exps)] = mpq(coeff_s)
    return LaurentPoly(terms, var_count)


def poly_arith(a: LaurentPoly, b: LaurentPoly, op: str) -> LaurentPoly:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def exact_div(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    """Return q with q*b = a exactly; raise NonExactDivision otherwise.

    Long division from the lexicographically largest remainder term.  For an
    exact quotient every quotient exponent lies between trail(a)-trail(b) and
    lead(a)-lead(b) in the lex order, so dropping below the lower bound proves
    non-exactness and bounds the loop.
    """
    if b.is_zero:
        raise ZeroDivisionError("division by the zero polynomial")
    a._check(b)
    if a.is_zero:
        return LaurentPoly.zero(a.var_count)
    sub = operator.sub
    add = operator.add
    lead_b = max(b.terms)
    lead_c = b.terms[lead_b]
    rest_b = [(e, c) for e, c in b.terms.items() if e != lead_b]
    low_bound = tuple(map(sub, min(a.terms), min(b.terms)))
    rem = dict(a.terms)
    # heapq is a min-heap; store negated exponents to pop the lex max first.
    heap = [tuple(-x for x in e) for e in rem]
    heapq.heapify(heap)
    quo: dict = {}
    while rem:
        while True:
            top = tuple(-x for x in heapq.heappop(heap))
            if top in rem:
                break
        qe = tuple(map(sub, top, lead_b))
        if qe < low_bound:
            raise NonExactDivision(
                f"nonzero remainder: term {top} not reachable from divisor"
            )
        qc = rem.pop(top) / lead_c
        quo[qe] = qc
        for eb, cb in rest_b:
            e2 = tuple(map(add, qe, eb))
            acc = rem.get(e2)
            if acc is None:
                rem[e2] = -qc * cb
                heapq.heappush(heap, tuple(-x for x in e2))
            else:
                acc = acc - qc * cb
                if acc:
                    rem[e2] = acc
                else:
                    del rem[e2]
    return LaurentPoly(quo, a.var_count)


def substitute(
    p: LaurentPoly,
    images: Sequence[tuple],
    out_var_count: int,
) -> LaurentPoly:
    """Apply the monomial substitution homomorphism.

    images[i] describes where z_{i+1} goes: a tuple
    (coeff, s_exp, q2_exp, z_exps) meaning
    z_{i+1} -> coeff * s^s_exp * q2^q2_exp * prod_j z_j^z_exps[j],
    with z_exps of length out_var_count.  The rule must be total on the
    variables of p.  Monomial images are invertible, so negative input
    exponents are fine as long as coeff is nonzero.
    """
    if len(images) != p.var_count:
        raise VariableCountMismatch(
            f"need {p.var_count} images, got {len(images)}"
        )
    prepared = []
    for coeff, s_e, q2_e, z_exps in images:
        if len(z_exps) != out_var_count:
            raise VariableCountMismatch("image exponent vector length mismatch")
        prepared.append((_as_mpq(coeff), (s_e, q2_e, *z_exps)))
    out: dict = {}
    width = out_var_count + 2
    for e, c in p.terms.items():
        acc = [e[0], e[1]] + [0] * out_var_count
        coeff = c
        dead = False
        for i in range(p.var_count):
            x = e[i + 2]
            if x == 0:
                continue
            ic, ie = prepared[i]
            if not ic:
                if x > 0:
                    dead = True
                    break
                raise ZeroDivisionError(
                    "negative exponent substituted into a zero value"
                )
            coeff = coeff * ic**x
            for j in range(width):
                acc[j] += x * ie[j]
        if dead:
            continue
        key = tuple(acc)
        prev = out.get(key)
        if prev is None:
            out[key] = coeff
        else:
            prev = prev + coeff
            if prev:
                out[key] = prev
            else:
                del out[key]
    return LaurentPoly(out, out_var_count)


def identity_images(var_count: int) -> list:
    """Substitution images leaving every variable in place."""
    out = []
    for i in range(var_count):
        z = [0] * var_count
        z[i] = 1
        out.append((QONE, 0, 0, tuple(z)))
    return out


def relabel_images(targets: Sequence[int], out_var_count: int) -> list:
    """Images sending z_{i+1} to z_{targets[i]+1} (0-based targets)."""
    out = []
    for t in targets:
        z = [0] * out_var_count
        z[t] = 1
        out.append((QONE, 0, 0, tuple(z)))
    return out


_SYMPY_CTX = None


def _sympy_ctx():
    global _SYMPY_CTX
    if _SYMPY_CTX is None:
        import sympy

        _SYMPY_CTX = (sympy, sympy.symbols("s q2"))
    return _SYMPY_CTX


def param_gcd(a: LaurentPoly | None, b: LaurentPoly | None) -> LaurentPoly | None:
    """Gcd of parameter-only Laurent polynomials, up to units.

    Inputs are shifted to ordinary polynomials first, so monomial factors
    never survive; None folds as the identity for incremental use.
    """
    if a is None:
        return b
    if b is None:
        return a
    if a.var_count or b.var_count:
        raise VariableCountMismatch("param_gcd expects k = 0 polynomials")
    if a.is_zero:
        return b
    if b.is_zero:
        return a

    def to_ordinary(p: LaurentPoly) -> LaurentPoly:
        s_min = min(e[0] for e in p.terms)
        q2_min = min(e[1] for e in p.terms)
        return p.shift(-s_min, -q2_min) if (s_min or q2_min) else p

    a0, b0 = to_ordinary(a), to_ordinary(b)
    if len(a0.terms) == 1 or len(b0.terms) == 1:
        return LaurentPoly.const(QONE, 0)
    sympy, (sym_s, sym_q2) = _sympy_ctx()
    pa = sympy.Poly.from_dict(
        {e: sympy.Rational(int(c.numerator), int(c.denominator)) for e, c in a0.terms.items()},
        sym_s,
        sym_q2,
    )
    pb = sympy.Poly.from_dict(
        {e: sympy.Rational(int(c.numerator), int(c.denominator)) for e, c in b0.terms.items()},
        sym_s,
        sym_q2,
    )
    g = pa.gcd(pb)
    terms = {
        (int(e[0]), int(e[1])): mpq(int(c.p), int(c.q)) for e, c in g.terms()
    }
    return LaurentPoly(terms, 0)


class ParamScalar:
    """Element of the fraction field of parameter-only Laurent polynomials.

    Normalized so both parts have integer coefficients with joint content 1
    and the denominator's lex-leading coefficient is positive; equality is
    still decided by cross-multiplication, so correctness never depends on
    gcd reduction.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: LaurentPoly, den: LaurentPoly):
        if num.var_count != 0 or den.var_count != 0:
            raise VariableCountMismatch("ParamScalar parts must have k = 0")
        if den.is_zero:
            raise ZeroDivisionError("ParamScalar with zero denominator")
        if num.is_zero:
            self.num = LaurentPoly.zero(0)
            self.den = LaurentPoly.const(QONE, 0)
            return
        coeffs = list(num.terms.values()) + list(den.terms.values())
        scale = mpq(
            math.lcm(*(int(c.denominator) for c in coeffs)),
            math.gcd(*(int(c.numerator) for c in coeffs)),
        )
        if den.terms[max(den.terms)] < 0:
            scale = -scale
        self.num = num.scale(scale)
        self.den = den.scale(scale)

    # -- constructors --------------------------------------------------------

    @staticmethod
    def from_value(value) -> "ParamScalar":
        c = _as_mpq(value)
        return ParamScalar(LaurentPoly.const(c, 0), LaurentPoly.const(QONE, 0))

    @staticmethod
    def from_poly(num: LaurentPoly, den: LaurentPoly | None = None) -> "ParamScalar":
        return ParamScalar(num, den if den is not None else LaurentPoly.const(QONE, 0))

    @staticmethod
    def s_power(n: int) -> "ParamScalar":
        return ParamScalar.from_poly(LaurentPoly.param(QONE, n, 0))

    @staticmethod
    def q2_power(n: int) -> "ParamScalar":
        return ParamScalar.from_poly(LaurentPoly.param(QONE, 0, n))

    @staticmethod
    def q_power(n: int) -> "ParamScalar":
        """q = q1*q2 = s^2*q2."""
        return ParamScalar.from_poly(LaurentPoly.param(QONE, 2 * n, n))

    @staticmethod
    def q1_power(n: int) -> "ParamScalar":
        return ParamScalar.from_poly(LaurentPoly.param(QONE, 2 * n, 0))

    # -- predicates -----------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def __bool__(self) -> bool:
        return not self.num.is_zero

    def __eq__(self, other) -> bool:
        if not isinstance(other, ParamScalar):
            other = ParamScalar.from_value(other)
        return self.num * other.den == other.num * self.den

    def __hash__(self):  # pragma: no cover
        raise TypeError("ParamScalar is unhashable; compare by equality")

    # -- field operations ------------------------------------------------------

    @staticmethod
    def _coerce(value) -> "ParamScalar":
        return value if isinstance(value, ParamScalar) else ParamScalar.from_value(value)

    def __add__(self, other) -> "ParamScalar":
        other = self._coerce(other)
        return ParamScalar(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    __radd__ = __add__

    def __sub__(self, other) -> "ParamScalar":
        other = self._coerce(other)
        return ParamScalar(
            self.num * other.den - other.num * self.den, self.den * other.den
        )

    def __rsub__(self, other) -> "ParamScalar":
        return self._coerce(other) - self

    def __neg__(self) -> "ParamScalar":
        return ParamScalar(-self.num, self.den)

    def __mul__(self, other) -> "ParamScalar":
        other = self._coerce(other)
        return ParamScalar(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ParamScalar":
        other = self._coerce(other)
        if other.is_zero:
            raise ZeroDivisionError("division by zero ParamScalar")
        return ParamScalar(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other) -> "ParamScalar":
        return self._coerce(other) / self

    def inverse(self) -> "ParamScalar":
        if self.is_zero:
            raise ZeroDivisionError("inverting zero ParamScalar")
        return ParamScalar(self.den, self.num)

    def __pow__(self, n: int) -> "ParamScalar":
        if n < 0:
            return self.inverse() ** (-n)
        out = ParamScalar.from_value(QONE)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- serialization -----------------------------------------------------------

    def canonical_text(self) -> str:
        return f"{self.num.canonical_text()} / {self.den.canonical_text()}"

    def __repr__(self):  # pragma: no cover
        return f"ParamScalar({self.canonical_text()})"


def parse_scalar(text: str) -> ParamScalar:
    num_s, _, den_s = text.partition(" / ")
    return ParamScalar(parse_poly(num_s, 0), parse_poly(den_s, 0))


PS_ONE = ParamScalar.from_value(1)
PS_ZERO = ParamScalar.from_value(0)
