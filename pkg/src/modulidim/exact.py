"""Exact arithmetic: rationals, Laurent polynomials, and rational functions
whose denominators are products of ``(1 - t^e)``.

Also hosts the controlled high-precision numeric layer (mpmath contexts and
rationalization) used by the cyclotomic sums.
"""

from __future__ import annotations

import math
import os
import re
import threading
from collections import Counter
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence, Union

import mpmath

from .errors import NonPolynomial, RationalizationFailed, ValidationError

Rational = Fraction
RationalLike = Union[int, Fraction, str]

DEFAULT_PRECISION = 100
PRECISION_ENV = "MODULIDIM_PRECISION"

_EXP_LIMIT = 2**63 - 1
_RATIONAL_RE = re.compile(r"^\s*[-+]?\d+(\s*/\s*\d+)?\s*$")


# ---------------------------------------------------------------- rationals


def parse_rational(value: RationalLike) -> Fraction:
    """Parse an int, Fraction or ``"p/q"`` string. Floats are refused."""
    if isinstance(value, bool):
        raise ValidationError(f"not a rational: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str) and _RATIONAL_RE.match(value):
        try:
            return Fraction(value.replace(" ", ""))
        except ZeroDivisionError:
            raise ValidationError(f"zero denominator in {value!r}") from None
    raise ValidationError(f"not an exact rational: {value!r}")


def format_rational(value: Fraction | int) -> str:
    return str(Fraction(value))


# ----------------------------------------------------------- Laurent polys


class LaurentPoly:
    """Finitely supported map from integer exponent vectors to rationals.

    Immutable. ``variables`` names the coordinates of the exponent vectors,
    e.g. ``("s", "t")``. Zero coefficients are never stored.
    """

    __slots__ = ("variables", "_terms", "_hash")

    def __init__(
        self,
        terms: Mapping[Sequence[int] | int, RationalLike] | None = None,
        variables: Sequence[str] = ("t",),
    ):
        variables = tuple(variables)
        arity = len(variables)
        clean: dict[tuple[int, ...], Fraction] = {}
        for exps, coeff in (terms or {}).items():
            key = (exps,) if isinstance(exps, int) else tuple(exps)
            if len(key) != arity:
                raise ValueError(f"exponent {key} does not match variables {variables}")
            for e in key:
                if abs(e) > _EXP_LIMIT:
                    raise OverflowError(f"exponent {e} exceeds machine width")
            c = clean.get(key, 0) + Fraction(coeff)
            clean[key] = c
        self.variables = variables
        self._terms = {k: c for k, c in clean.items() if c}
        self._hash = None

    # construction helpers

    @classmethod
    def _raw(cls, terms: dict, variables: tuple[str, ...]) -> "LaurentPoly":
        # trusted path: keys already tuples of right arity, no zero coefficients
        obj = cls.__new__(cls)
        obj.variables = variables
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def constant(cls, value: RationalLike, variables: Sequence[str] = ("t",)) -> "LaurentPoly":
        variables = tuple(variables)
        return cls({(0,) * len(variables): value}, variables)

    @classmethod
    def monomial(
        cls, exps: Sequence[int] | int, coeff: RationalLike = 1, variables: Sequence[str] = ("t",)
    ) -> "LaurentPoly":
        return cls({exps if not isinstance(exps, int) else (exps,): coeff}, variables)

    @classmethod
    def from_terms(cls, terms: Iterable, variables: Sequence[str] = ("t",)) -> "LaurentPoly":
        """Build from ``[[coeff, [e1, e2, ...]], ...]`` with string or int coefficients."""
        acc: dict[tuple[int, ...], Fraction] = {}
        for coeff, exps in terms:
            key = (int(exps),) if isinstance(exps, int) else tuple(int(e) for e in exps)
            acc[key] = acc.get(key, 0) + parse_rational(coeff)
        return cls(acc, variables)

    # inspection

    @property
    def terms(self) -> Mapping[tuple[int, ...], Fraction]:
        return MappingProxyType(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def coefficient(self, exps: Sequence[int] | int) -> Fraction:
        key = (exps,) if isinstance(exps, int) else tuple(exps)
        return self._terms.get(key, Fraction(0))

    def degree_range(self, index: int = 0) -> tuple[int, int]:
        if not self._terms:
            raise ValueError("zero polynomial has no degree")
        degs = [k[index] for k in self._terms]
        return min(degs), max(degs)

    def to_terms(self) -> list[list]:
        return [[format_rational(c), list(k)] for k, c in sorted(self._terms.items())]

    def evaluate(self, point: Sequence[RationalLike] | Mapping[str, RationalLike]) -> Fraction:
        if isinstance(point, Mapping):
            values = [Fraction(point[v]) for v in self.variables]
        else:
            values = [Fraction(x) for x in point]
        if len(values) != len(self.variables):
            raise ValueError("point has wrong dimension")
        total = Fraction(0)
        for exps, coeff in self._terms.items():
            term = coeff
            for x, e in zip(values, exps):
                term *= x**e
            total += term
        return total

    # arithmetic

    def _coerce(self, other) -> "LaurentPoly":
        if isinstance(other, LaurentPoly):
            if other.variables != self.variables:
                raise ValueError(f"variable mismatch: {self.variables} vs {other.variables}")
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return LaurentPoly.constant(other, self.variables)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for k, c in other._terms.items():
            v = out.get(k, 0) + c
            if v:
                out[k] = v
            else:
                out.pop(k, None)
        return LaurentPoly._raw(out, self.variables)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly._raw({k: -c for k, c in self._terms.items()}, self.variables)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[tuple[int, ...], Fraction] = {}
        for k1, c1 in self._terms.items():
            for k2, c2 in other._terms.items():
                key = tuple(a + b for a, b in zip(k1, k2))
                out[key] = out.get(key, 0) + c1 * c2
        for key in out:
            for e in key:
                if abs(e) > _EXP_LIMIT:
                    raise OverflowError(f"exponent {e} exceeds machine width")
        return LaurentPoly._raw({k: c for k, c in out.items() if c}, self.variables)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            if len(self._terms) != 1:
                raise ValueError("only monomials have Laurent inverses")
            (k, c), = self._terms.items()
            return LaurentPoly._raw({tuple(e * n for e in k): c**n}, self.variables)
        result = LaurentPoly.constant(1, self.variables)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, LaurentPoly):
            return self.variables == other.variables and self._terms == other._terms
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self == LaurentPoly.constant(other, self.variables)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.variables, frozenset(self._terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self._terms)

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for exps, coeff in sorted(self._terms.items()):
            mono = " ".join(f"{v}^{e}" for v, e in zip(self.variables, exps) if e)
            parts.append(f"{coeff} * {mono}" if mono else str(coeff))
        return " + ".join(parts)

    def __repr__(self):
        return f"LaurentPoly({str(self)!r}, variables={self.variables})"

    def compact(self) -> str:
        """Human form, e.g. ``t^-1+1+t`` or ``-(t^-1+1+t)`` when every
        coefficient is negative."""
        if not self._terms:
            return "0"
        if all(c < 0 for c in self._terms.values()) and len(self._terms) > 1:
            return f"-({(-self).compact()})"
        out = ""
        for exps, coeff in sorted(self._terms.items()):
            mono = "*".join(
                v if e == 1 else f"{v}^{e}" for v, e in zip(self.variables, exps) if e
            )
            mag = abs(coeff)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            sign = "-" if coeff < 0 else "+"
            out += body if (not out and sign == "+") else sign + body
        return out


def t_poly(coeffs: Mapping[int, RationalLike]) -> LaurentPoly:
    """Shorthand for a one-variable Laurent polynomial in ``t``."""
    return LaurentPoly({(e,): c for e, c in coeffs.items()}, ("t",))


def eval_at_one(p: LaurentPoly) -> Fraction:
    """Evaluate a one-variable Laurent polynomial at 1 (its coefficient sum)."""
    if len(p.variables) != 1:
        raise ValueError("eval_at_one expects a single variable")
    return sum(p.terms.values(), Fraction(0))


# ------------------------------------------------------- rational functions


def _dense(p: LaurentPoly) -> tuple[int, list[Fraction]]:
    lo, hi = p.degree_range()
    coeffs = [Fraction(0)] * (hi - lo + 1)
    for (e,), c in p.terms.items():
        coeffs[e - lo] = c
    return lo, coeffs


def _divide_exact(num: LaurentPoly, den: LaurentPoly) -> LaurentPoly | None:
    """num / den as a Laurent polynomial, or None when it leaves a remainder.

    ``den`` must be a polynomial with nonzero constant term.
    """
    if num.is_zero():
        return num
    lo, p = _dense(num)
    dlo, d = _dense(den)
    if dlo != 0:
        raise ValueError("divisor needs a nonzero constant term")
    n_q = len(p) - len(d) + 1
    if n_q <= 0:
        return None
    q = [Fraction(0)] * n_q
    rem = list(p)
    d0 = d[0]
    for i in range(n_q):
        c = rem[i] / d0
        q[i] = c
        if c:
            for j, dj in enumerate(d):
                rem[i + j] -= c * dj
    if any(rem):
        return None
    return LaurentPoly({(lo + i,): c for i, c in enumerate(q) if c}, num.variables)


def _one_minus_t(e: int, variables: tuple[str, ...]) -> LaurentPoly:
    return LaurentPoly({(0,): 1, (e,): -1}, variables)


class RationalFunction:
    """``numerator / prod_e (1 - t^e)`` with a Laurent numerator in one variable.

    Factor exponents are normalized to be positive and factors dividing the
    numerator are cancelled. Equality is decided by cross-multiplication.
    """

    __slots__ = ("numerator", "factors")

    def __init__(self, numerator: LaurentPoly | RationalLike, factors: Iterable[int] = ()):
        if not isinstance(numerator, LaurentPoly):
            numerator = LaurentPoly.constant(parse_rational(numerator))
        if len(numerator.variables) != 1:
            raise ValueError("rational functions are univariate")
        var = numerator.variables
        num = numerator
        pos: list[int] = []
        for e in factors:
            e = int(e)
            if e == 0:
                raise ValueError("denominator factor (1 - t^0) vanishes")
            if e < 0:
                # 1/(1 - t^-k) = -t^k / (1 - t^k)
                num = num * LaurentPoly({(-e,): -1}, var)
                e = -e
            pos.append(e)
        kept: list[int] = []
        for e in sorted(pos):
            quotient = _divide_exact(num, _one_minus_t(e, var))
            if quotient is None:
                kept.append(e)
            else:
                num = quotient
        self.numerator = num
        self.factors = tuple(kept) if not num.is_zero() else ()

    @property
    def variables(self) -> tuple[str, ...]:
        return self.numerator.variables

    def denominator(self) -> LaurentPoly:
        out = LaurentPoly.constant(1, self.variables)
        for e in self.factors:
            out = out * _one_minus_t(e, self.variables)
        return out

    def _coerce(self, other) -> "RationalFunction":
        if isinstance(other, RationalFunction):
            if other.variables != self.variables:
                raise ValueError("variable mismatch")
            return other
        if isinstance(other, LaurentPoly):
            return RationalFunction(other)
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return RationalFunction(LaurentPoly.constant(other, self.variables))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        mine, theirs = Counter(self.factors), Counter(other.factors)
        common = mine | theirs
        num = self.numerator
        for e in (common - mine).elements():
            num = num * _one_minus_t(e, self.variables)
        other_num = other.numerator
        for e in (common - theirs).elements():
            other_num = other_num * _one_minus_t(e, self.variables)
        return RationalFunction(num + other_num, common.elements())

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.numerator, self.factors)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return RationalFunction(self.numerator * other.numerator, self.factors + other.factors)

    __rmul__ = __mul__

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.numerator * other.denominator() == other.numerator * self.denominator()

    __hash__ = None

    def is_laurent(self) -> bool:
        return not self.factors

    def to_laurent(self) -> LaurentPoly:
        if not self.factors:
            return self.numerator
        quotient = _divide_exact(self.numerator, self.denominator())
        if quotient is None:
            raise NonPolynomial(f"{self} is not a Laurent polynomial")
        return quotient

    def series(self, lo: int, hi: int) -> dict[int, Fraction]:
        """Coefficients of the expansion in ascending powers of t, for
        degrees ``lo..hi``. Zero coefficients are omitted."""
        if self.numerator.is_zero():
            return {}
        nlo, _ = self.numerator.degree_range()
        # each factor expands as sum_k t^(k e); keep what can reach degree hi
        span = max(hi - nlo, 0)
        series = {0: Fraction(1)}
        for e in self.factors:
            nxt: dict[int, Fraction] = {}
            for d, c in series.items():
                k = 0
                while d + k * e <= span:
                    nxt[d + k * e] = nxt.get(d + k * e, 0) + c
                    k += 1
            series = nxt
        out: dict[int, Fraction] = {}
        for (e,), c in self.numerator.terms.items():
            for d, s in series.items():
                deg = e + d
                if lo <= deg <= hi:
                    out[deg] = out.get(deg, 0) + c * s
        return {d: c for d, c in sorted(out.items()) if c}

    def __str__(self):
        if not self.factors:
            return f"({self.numerator.compact()})"
        var = self.variables[0]
        den = "".join(f"(1-{var})" if e == 1 else f"(1-{var}^{e})" for e in self.factors)
        return f"({self.numerator.compact()})/{den}"

    def __repr__(self):
        return f"RationalFunction({self})"


def rf_add(a: RationalFunction, b: RationalFunction) -> RationalFunction:
    return a + b


def rf_to_laurent(a: RationalFunction) -> LaurentPoly:
    return a.to_laurent()


# ------------------------------------------------------- numeric precision


def default_precision() -> int:
    raw = os.environ.get(PRECISION_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_PRECISION
    try:
        prec = int(raw)
    except ValueError:
        raise ValidationError(f"{PRECISION_ENV} must be an integer, got {raw!r}") from None
    if prec < 53:
        raise ValidationError(f"{PRECISION_ENV} must be at least 53 bits")
    return prec


_contexts = threading.local()


def mp_context(prec: int | None = None) -> mpmath.MPContext:
    """A per-thread mpmath context at ``prec`` bits (never the global ``mp``)."""
    if prec is None:
        prec = default_precision()
    cache = getattr(_contexts, "cache", None)
    if cache is None:
        cache = _contexts.cache = {}
    ctx = cache.get(prec)
    if ctx is None:
        ctx = mpmath.MPContext()
        ctx.prec = prec
        cache[prec] = ctx
    return ctx


def mpf_to_fraction(x) -> Fraction:
    sign, man, exp, _ = x._mpf_
    if not man and exp:
        raise ValueError(f"{x} is not finite")
    value = Fraction(int(man)) * Fraction(2) ** int(exp)
    return -value if sign else value


def rationalize(x, denominator_bound: int, prec: int | None = None) -> Fraction:
    """The rational p/q with q <= bound closest to ``x``, provided it lies
    within ``2**-(prec/2)`` of ``x``.

    Raises RationalizationFailed otherwise.
    """
    if prec is None:
        prec = default_precision()
    if denominator_bound < 1:
        raise ValueError("denominator bound must be positive")
    exact = mpf_to_fraction(x)
    guess = exact.limit_denominator(denominator_bound)
    tol = Fraction(1, 2 ** (prec // 2))
    if abs(exact - guess) > tol:
        raise RationalizationFailed(
            f"no rational with denominator <= {denominator_bound} within 2^-{prec // 2} of {x}"
        )
    return guess


def is_integer(x: Fraction) -> bool:
    return Fraction(x).denominator == 1


def isqrt_exact(n: int) -> int | None:
    """Integer square root of n when n is a perfect square, else None."""
    if n < 0:
        return None
    r = math.isqrt(n)
    return r if r * r == n else None
