"""Dedekind sums s(w; m) = (1/4m) sum_k cot(pi k/m) cot(pi k w/m).

The exact value comes from the reciprocity law

    s(h, k) + s(k, h) = -1/4 + (h/k + k/h + 1/(hk)) / 12

run as a Euclidean descent, so it costs O(log m) integer operations.
The cotangent sum itself is kept as an independent numeric cross-check.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from .errors import NotCoprime, ValidationError
from .exact import default_precision, mp_context


def _check_args(w: int, m: int) -> int:
    if isinstance(w, bool) or isinstance(m, bool) or not isinstance(w, int) or not isinstance(m, int):
        raise ValidationError(f"Dedekind sum needs integers, got w={w!r}, m={m!r}")
    if m < 1:
        raise ValidationError(f"m must be positive, got {m}")
    if math.gcd(w, m) != 1:
        raise NotCoprime(f"gcd({w}, {m}) = {math.gcd(w, m)} != 1")
    return w % m


def _reciprocity_descent(h: int, k: int) -> tuple[int, int]:
    # s(h,k) = (h^2 + k^2 + 1 - 3hk)/(12hk) - s(k mod h, h), down to s(1,k).
    # Kept as an unreduced integer pair; a single gcd at the end.
    num, den, sign = 0, 1, 1
    while h > 1:
        step = 12 * h * k
        num = num * step + sign * (h * h + k * k + 1 - 3 * h * k) * den
        den *= step
        h, k = k % h, h
        sign = -sign
    step = 12 * k
    num = num * step + sign * (k - 1) * (k - 2) * den
    den *= step
    g = math.gcd(num, den)
    return num // g, den // g


def dedekind_sum(w: int, m: int) -> Fraction:
    """Exact Dedekind sum s(w; m) for coprime w, m with m >= 1.

    ``w`` is reduced mod m first; ``s(w; 1) = 0``.

    >>> dedekind_sum(1, 3)
    Fraction(1, 18)
    >>> dedekind_sum(5, 7)
    Fraction(-1, 14)
    """
    h = _check_args(w, m)
    if m == 1:
        return Fraction(0)
    num, den = _reciprocity_descent(h, m)
    return Fraction(num, den)


def reciprocity_rhs(h: int, k: int) -> Fraction:
    """Right-hand side of the reciprocity law for s(h,k) + s(k,h)."""
    return Fraction(-1, 4) + (Fraction(h, k) + Fraction(k, h) + Fraction(1, h * k)) / 12


@lru_cache(maxsize=512)
def _cot_table(m: int, prec: int) -> tuple[int, ...]:
    # cot(pi j/m) for j = 0..m-1 as fixed-point integers scaled by 2**(prec+guard)
    ctx = mp_context(prec + 32)
    scale = prec + 16
    out = [0]
    for j in range(1, m):
        c = ctx.cot(ctx.pi * j / m)
        out.append(int(ctx.nint(ctx.ldexp(c, scale))))
    return tuple(out)


def dedekind_sum_numeric(w: int, m: int, prec: int | None = None):
    """Direct cotangent summation at ``prec`` bits; returns an mpmath mpf."""
    h = _check_args(w, m)
    if prec is None:
        prec = default_precision()
    ctx = mp_context(prec)
    if m == 1:
        return ctx.mpf(0)
    table = _cot_table(m, prec)
    total = sum(table[k] * table[k * h % m] for k in range(1, m))
    scale = prec + 16
    return ctx.ldexp(ctx.mpf(total), -2 * scale) / (4 * m)
