"""Dual numbers for forward-mode differentiation.

Components may themselves be :class:`Dual`, which gives exact higher
derivatives by nesting: seed the inner level first, then wrap it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable


@dataclass(frozen=True)
class Dual:
    """a + b eps with eps^2 = 0."""

    re: object
    du: object = 0.0

    @staticmethod
    def _lift(x) -> "Dual":
        return x if isinstance(x, Dual) else Dual(x, 0.0)

    def __add__(self, other):
        o = self._lift(other)
        return Dual(self.re + o.re, self.du + o.du)

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.re, -self.du)

    def __sub__(self, other):
        o = self._lift(other)
        return Dual(self.re - o.re, self.du - o.du)

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        return Dual(self.re * o.re, self.re * o.du + self.du * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        if o.re == 0:
            raise ZeroDivisionError("dual division by a number with zero real part")
        return Dual(self.re / o.re, (self.du * o.re - self.re * o.du) / (o.re * o.re))

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("only integer powers")
        if n == 0:
            return Dual(self.re**0, self.du * 0)
        if n < 0:
            return 1 / self ** (-n)
        out = self
        for _ in range(n - 1):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, Dual):
            return self.re == other.re and self.du == other.du
        return self.re == other and self.du == 0

    def __hash__(self):
        return hash((self.re, self.du))


def real_part(x):
    """Strip every dual level and return the underlying real value."""
    while isinstance(x, Dual):
        x = x.re
    return x


def sqrt(x):
    if isinstance(x, Dual):
        root = sqrt(x.re)
        return Dual(root, x.du / (2 * root))
    return math.sqrt(x)


def derivative(f: Callable, x):
    """f'(x) by seeding one dual level; ``x`` may already be dual."""
    return f(Dual(x, 1.0)).du
