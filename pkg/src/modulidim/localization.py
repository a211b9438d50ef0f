"""Equivariant localization over closed Reeb orbits of a toric Sasaki 5-manifold.

Each closed orbit contributes

    numerator(s, t) * prod [1 / (1 - s^a t^b)]^{+/-} * delta(1 - u s^c t^d)

with [1/(1-x)]^+ = sum_{k>=0} x^k, [1/(1-x)]^- = -sum_{k>=1} x^{-k} and
delta(1 - y) = sum_{n in Z} y^n. The part invariant under the torus closure
of the Reeb flow (generated by s and u) is read off by keeping s^0 u^0 terms,
which leaves a rational function of t per orbit.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InconsistentFormulas, QuasiRegularWarning, Unsupported, ValidationError
from .exact import LaurentPoly, RationalFunction, eval_at_one, isqrt_exact

ST = ("s", "t")
STU = ("s", "t", "u")


class Polarization(enum.Enum):
    PLUS = "+"
    MINUS = "-"


@dataclass(frozen=True)
class ExpansionFactor:
    """[1 / (1 - s^a t^b)]^{polarization} with ``monomial = (a, b)``."""

    monomial: tuple[int, int]
    polarization: Polarization = Polarization.PLUS

    def __post_init__(self):
        a, b = (int(x) for x in self.monomial)
        if (a, b) == (0, 0):
            raise ValidationError("expansion factor monomial must not be (0, 0)")
        object.__setattr__(self, "monomial", (a, b))
        object.__setattr__(self, "polarization", Polarization(self.polarization))

    @property
    def carries_s(self) -> bool:
        return self.monomial[0] != 0


@dataclass(frozen=True)
class OrbitContribution:
    numerator: LaurentPoly
    factors: tuple[ExpansionFactor, ...]
    delta: tuple[int, int] = (0, 0)
    label: str = ""

    def __post_init__(self):
        if self.numerator.variables != ST:
            raise ValidationError(f"numerator must be in (s, t), got {self.numerator.variables}")
        object.__setattr__(self, "factors", tuple(self.factors))
        object.__setattr__(self, "delta", tuple(int(x) for x in self.delta))
        if len(self.delta) != 2:
            raise ValidationError("delta monomial is an exponent pair (a, b)")

    @classmethod
    def from_json(cls, obj: dict) -> "OrbitContribution":
        return cls(
            numerator=LaurentPoly.from_terms(obj["numerator"], ST),
            factors=tuple(
                ExpansionFactor(tuple(f["monomial"]), Polarization(f.get("polarization", "+")))
                for f in obj.get("factors", [])
            ),
            delta=tuple(obj.get("delta", (0, 0))),
            label=obj.get("label", ""),
        )

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "numerator": self.numerator.to_terms(),
            "factors": [
                {"monomial": list(f.monomial), "polarization": f.polarization.value}
                for f in self.factors
            ],
            "delta": list(self.delta),
        }


@dataclass(frozen=True)
class YpqParams:
    p: int
    q: int

    def __post_init__(self):
        for name in ("p", "q"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int):
                raise ValidationError(f"{name} must be an integer, got {v!r}")
        if not self.p > self.q >= 0:
            raise ValidationError(f"need p > q >= 0, got p={self.p}, q={self.q}")
        if math.gcd(self.p, self.q) != 1:
            raise ValidationError(f"p={self.p}, q={self.q} are not coprime")


class Regularity(enum.Enum):
    QUASI_REGULAR = "QuasiRegular"
    IRREGULAR = "Irregular"


# ---------------------------------------------------------------- Y^{p,q}


def ypq_orbit_data(y: YpqParams) -> list[OrbitContribution]:
    """The four closed-orbit contributions for the anti-self-dual 2-form
    bundle on Y^{p,q}."""
    p, q = y.p, y.q
    num_0 = LaurentPoly({(0, 0): 1, (1, -1): 1, (-1, 1): 1}, ST)  # 1 + s/t + t/s
    num_1 = LaurentPoly({(0, 0): 1, (1, 3): 1, (-1, -3): 1}, ST)  # 1 + s t^3 + 1/(s t^3)
    plus, minus = Polarization.PLUS, Polarization.MINUS
    return [
        OrbitContribution(
            num_0,
            (ExpansionFactor((-1, 0), plus), ExpansionFactor((0, -1), plus)),
            (0, 0),
            "O00",
        ),
        OrbitContribution(
            num_1,
            (ExpansionFactor((-1, -2), plus), ExpansionFactor((0, 1), plus)),
            (0, q - p),
            "O01",
        ),
        OrbitContribution(
            num_0,
            (ExpansionFactor((-1, 0), minus), ExpansionFactor((0, -1), plus)),
            (p, 0),
            "O10",
        ),
        OrbitContribution(
            num_1,
            (ExpansionFactor((-1, -2), minus), ExpansionFactor((0, 1), plus)),
            (p, p + q),
            "O11",
        ),
    ]


def quasi_regularity(y: YpqParams) -> Regularity:
    """Quasi-regular exactly when 4p^2 - 3q^2 is a perfect square."""
    if isqrt_exact(4 * y.p**2 - 3 * y.q**2) is None:
        return Regularity.IRREGULAR
    return Regularity.QUASI_REGULAR


# -------------------------------------------------------------- extraction


def _s_factor(c: OrbitContribution) -> ExpansionFactor | None:
    carrying = [f for f in c.factors if f.carries_s]
    if len(carrying) > 1:
        raise Unsupported(
            f"orbit {c.label or '?'} has {len(carrying)} factors carrying s; "
            "s^0 extraction needs at most one"
        )
    return carrying[0] if carrying else None


def extract_contribution(c: OrbitContribution) -> RationalFunction:
    """The s^0 u^0 part of one orbit contribution, as a rational function of t.

    u appears only in the delta, so u-invariance picks its n = 0 term. Each
    numerator monomial s^alpha t^beta then meets at most one term of the
    s-carrying expansion with total s-degree zero.
    """
    sf = _s_factor(c)
    matched: dict[tuple[int], Fraction] = {}
    for (alpha, beta), coeff in c.numerator.terms.items():
        if sf is None:
            if alpha == 0:
                matched[(beta,)] = matched.get((beta,), 0) + coeff
            continue
        a, b = sf.monomial
        if sf.polarization is Polarization.PLUS:
            # alpha + k a = 0, k >= 0
            k, r = divmod(-alpha, a)
            if r == 0 and k >= 0:
                key = (beta + k * b,)
                matched[key] = matched.get(key, 0) + coeff
        else:
            # alpha - k a = 0, k >= 1, sign -1
            k, r = divmod(alpha, a)
            if r == 0 and k >= 1:
                key = (beta - k * b,)
                matched[key] = matched.get(key, 0) - coeff
    t_exponents = [f.monomial[1] for f in c.factors if not f.carries_s]
    return RationalFunction(LaurentPoly(matched, ("t",)), t_exponents)


def invariant_rational_function(contribs: Iterable[OrbitContribution]) -> RationalFunction:
    total = RationalFunction(LaurentPoly({}, ("t",)))
    for c in contribs:
        total = total + extract_contribution(c)
    return total


def invariant_index(contribs: Iterable[OrbitContribution]) -> LaurentPoly:
    """Invariant part of the index as a Laurent polynomial in t.

    Raises NonPolynomial when the summed contributions do not cancel to a
    Laurent polynomial (an incomplete orbit table).
    """
    return invariant_rational_function(contribs).to_laurent()


def moduli_dimension(y: YpqParams) -> int:
    """Complex dimension of the instanton moduli space around the transverse
    Levi-Civita connection on Y^{p,q}: minus the invariant index at t = 1."""
    if quasi_regularity(y) is Regularity.QUASI_REGULAR:
        warnings.warn(
            f"Y^{{{y.p},{y.q}}} is quasi-regular; the rank-2 extraction is not the basic complex",
            QuasiRegularWarning,
        )
    value = -eval_at_one(invariant_index(ypq_orbit_data(y)))
    if value.denominator != 1:
        raise InconsistentFormulas(f"non-integral dimension {value}")
    return int(value)


# ------------------------------------------------------------------ oracle


def _factor_series(f: ExpansionFactor, window: int) -> LaurentPoly:
    a, b = f.monomial
    terms: dict[tuple[int, int, int], int] = {}
    if a == 0:
        # pure t factor: expand in ascending powers of t
        if b > 0:
            ks, sign, e = range(0, window // b + 1), 1, b
        else:
            ks, sign, e = range(1, window // -b + 1), -1, -b
        for k in ks:
            terms[(0, k * e, 0)] = sign
        return LaurentPoly(terms, STU)
    if f.polarization is Polarization.PLUS:
        ks, sign, direction = range(0, window + 1), 1, 1
    else:
        ks, sign, direction = range(1, window + 1), -1, -1
    for k in ks:
        es, et = direction * k * a, direction * k * b
        if abs(es) <= window and abs(et) <= window:
            terms[(es, et, 0)] = sign
    return LaurentPoly(terms, STU)


def _delta_series(delta: tuple[int, int], window: int) -> LaurentPoly:
    c, d = delta
    terms = {}
    for n in range(-window, window + 1):
        if abs(n * c) <= window and abs(n * d) <= window:
            terms[(n * c, n * d, n)] = 1
    return LaurentPoly(terms, STU)


def _degree_bounds(p: LaurentPoly) -> list[tuple[int, int]]:
    return [p.degree_range(i) for i in range(3)]


def _pruned_product(factors: Sequence[LaurentPoly], target: list[tuple[int, int]]) -> LaurentPoly:
    # multiply left to right, dropping monomials that the remaining factors
    # cannot bring into the target box
    suffix = [[(0, 0)] * 3 for _ in range(len(factors) + 1)]
    for i in range(len(factors) - 1, -1, -1):
        b = _degree_bounds(factors[i])
        suffix[i] = [(lo + s_lo, hi + s_hi) for (lo, hi), (s_lo, s_hi) in zip(b, suffix[i + 1])]
    acc = {(0, 0, 0): Fraction(1)}
    for i, f in enumerate(factors):
        rest = suffix[i + 1]
        nxt: dict[tuple[int, int, int], Fraction] = {}
        for k1, c1 in acc.items():
            for k2, c2 in f.terms.items():
                key = (k1[0] + k2[0], k1[1] + k2[1], k1[2] + k2[2])
                if all(
                    key[v] + rest[v][0] <= target[v][1] and key[v] + rest[v][1] >= target[v][0]
                    for v in range(3)
                ):
                    nxt[key] = nxt.get(key, 0) + c1 * c2
        acc = {k: c for k, c in nxt.items() if c}
    return LaurentPoly(acc, STU)


def oracle_trusted_window(contribs: Sequence[OrbitContribution], window: int) -> tuple[int, int]:
    """t-degrees on which the truncated expansion is exact.

    Pure-t series are cut above degree ``window``; every other piece of a
    surviving term has t-degree at least ``-reach``, where ``reach`` bounds the
    numerator t-exponents plus the t-shift of any s-factor term able to cancel
    a numerator s-exponent. Degrees in ``[-window, window - reach]`` are exact.
    """
    reach = 0
    for c in contribs:
        max_alpha = max((abs(a) for a, _ in c.numerator.terms), default=0)
        max_beta = max((abs(b) for _, b in c.numerator.terms), default=0)
        shift = 0
        for f in c.factors:
            a, b = f.monomial
            if a:
                k_max = max_alpha // abs(a)
                if k_max * abs(a) > window or k_max * abs(b) > window:
                    raise Unsupported("s-factor terms needed for s^0 lie outside the window")
                shift = max(shift, k_max * abs(b))
        reach = max(reach, max_beta + shift)
    if reach >= 2 * window:
        raise Unsupported(f"window {window} too small for exponents of reach {reach}")
    return -window, window - reach


def truncated_expansion_oracle(contribs: Sequence[OrbitContribution], window: int) -> LaurentPoly:
    """Brute-force check of :func:`invariant_index`.

    Expands every factor as an explicit truncated series in (s, t, u) with
    exponents bounded by ``window``, multiplies them out, keeps the
    s^0 u^0 part and returns the t-coefficients on the trusted window.
    Pure-t factors are expanded in ascending powers of t, so the sum over
    orbits reproduces the Laurent polynomial itself rather than a
    distributional expansion of it.
    """
    if window < 1:
        raise ValidationError("window must be >= 1")
    contribs = list(contribs)
    lo, hi = oracle_trusted_window(contribs, window)
    total: dict[tuple[int], Fraction] = {}
    for c in contribs:
        _s_factor(c)
        numerator = LaurentPoly({(a, b, 0): v for (a, b), v in c.numerator.terms.items()}, STU)
        series = [_delta_series(c.delta, window), numerator]
        series += [_factor_series(f, window) for f in c.factors]
        product = _pruned_product(series, [(0, 0), (-window, window), (0, 0)])
        for (es, et, eu), v in product.terms.items():
            if es == 0 and eu == 0 and lo <= et <= hi:
                total[(et,)] = total.get((et,), 0) + v
    return LaurentPoly(total, ("t",))
