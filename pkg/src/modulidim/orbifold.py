"""Index of the transverse Dolbeault complex over a quasi-regular K-contact
5-manifold whose leaf space X has isolated cyclic orbifold points.

Topological inputs (basic Betti numbers, signature, Euler characteristic,
Pontryagin and Euler integrals) are supplied by the caller. Each singular
point contributes a Kawasaki fixed-point term; the cyclotomic sums behind
those terms are evaluated numerically at high precision and rationalized.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .dedekind import dedekind_sum
from .errors import (
    InconsistentFormulas,
    InconsistentTopology,
    IntegralityWarning,
    MissingWeights,
    NegativeH11,
    NotCoprime,
    RationalizationFailed,
    ValidationError,
)
from .exact import RationalLike, default_precision, mp_context, parse_rational, rationalize


def _require_int(name: str, value, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{name} must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ValidationError(f"{name} must be >= {minimum}, got {value}")
    return value


@dataclass(frozen=True)
class CyclicSingularity:
    """Isolated point C^2/Z_m with generator acting as (z1, z2) -> (zeta z1, zeta^w z2).

    ``adjoint_weights`` are the weights of Z_m on the adjoint fibre, stored
    reduced mod m.
    """

    m: int
    w: int
    adjoint_weights: tuple[int, ...] | None = None

    def __post_init__(self):
        _require_int("m", self.m, 2)
        _require_int("w", self.w)
        if not 0 < self.w < self.m:
            raise ValidationError(f"need 0 < w < m, got w={self.w}, m={self.m}")
        if math.gcd(self.w, self.m) != 1:
            raise NotCoprime(f"w={self.w} is not coprime to m={self.m}")
        if self.adjoint_weights is not None:
            weights = tuple(_require_int("weight", u) % self.m for u in self.adjoint_weights)
            object.__setattr__(self, "adjoint_weights", weights)

    @classmethod
    def du_val(cls, m: int) -> "CyclicSingularity":
        """A_{m-1} point: w = m - 1."""
        return cls(m, m - 1)

    def asd_weights(self) -> tuple[int, ...]:
        """Weights of Z_m on the anti-self-dual 2-forms: {0, w-1, 1-w}."""
        return (0, (self.w - 1) % self.m, (1 - self.w) % self.m)


@dataclass(frozen=True)
class BasicTopology:
    b1_b: int | None = None
    bplus_b: int | None = None
    tau_b: Fraction | None = None
    chi_b: Fraction | None = None
    p1b_h: Fraction | None = None
    eb_h: Fraction | None = None

    def __post_init__(self):
        for name in ("b1_b", "bplus_b"):
            value = getattr(self, name)
            if value is not None:
                _require_int(name, value, 0)
        for name in ("tau_b", "chi_b", "p1b_h", "eb_h"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, parse_rational(value))
        if None not in (self.b1_b, self.bplus_b, self.tau_b, self.chi_b):
            lhs = 1 - self.b1_b + self.bplus_b
            rhs = (self.chi_b + self.tau_b) / 2
            if lhs != rhs:
                raise InconsistentTopology(
                    f"1 - b1_B + b+_B = {lhs} but (chi_B + tau_B)/2 = {rhs}"
                )


class Duality(enum.Enum):
    SD = "SD"
    ASD = "ASD"


@dataclass(frozen=True)
class ModuliDescriptorU1:
    duality: Duality
    b1: int
    lattice_rank: int
    torsion_orders: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "duality", Duality(self.duality))
        _require_int("b1", self.b1, 0)
        _require_int("lattice_rank", self.lattice_rank, 0)
        orders = tuple(_require_int("torsion order", t, 1) for t in self.torsion_orders)
        object.__setattr__(self, "torsion_orders", orders)


@dataclass(frozen=True)
class U1Moduli:
    component_group_rank: int
    component_torsion: tuple[int, ...]
    component_topology: str


@dataclass(frozen=True)
class K3Dimension:
    neg_index: int
    h11: Fraction


@dataclass(frozen=True)
class Flatness:
    value: Fraction
    is_flat: bool


@dataclass(frozen=True)
class Bookkeeping:
    tau_b: Fraction
    chi_b: Fraction
    p1b_asd: Fraction


# ------------------------------------------------------------ fixed points


def w_prime(s: CyclicSingularity) -> int:
    """Inverse of w mod m in (0, m)."""
    return pow(s.w, -1, s.m)


def _zeta(ctx, m: int, j: int):
    return ctx.expjpi(ctx.mpf(2 * (j % m)) / m)


def cyclotomic_sum(w: int, m: int, swap: bool = False, prec: int | None = None) -> Fraction:
    """sum_{k=1}^{m-1} (1 + zeta^{kw}) / (1 - zeta^k), rationalized.

    With ``swap`` the roles of 1 and w are exchanged. Closed forms are
    w - 1 and w' - 1 respectively.
    """
    if prec is None:
        prec = default_precision()
    ctx = mp_context(prec)
    a, b = (w, 1) if not swap else (1, w)
    total = ctx.mpc(0)
    for k in range(1, m):
        total += (1 + _zeta(ctx, m, k * a)) / (1 - _zeta(ctx, m, k * b))
    _check_real(ctx, total, prec)
    return rationalize(total.real, 4 * m * m, prec)


def _check_real(ctx, z, prec: int) -> None:
    if abs(z.imag) > ctx.ldexp(1, -(prec // 2)):
        raise RationalizationFailed(f"expected a real sum, imaginary part {z.imag}")


def fixed_point_term_adjoint_so3(s: CyclicSingularity) -> Fraction:
    """Closed form (2 - w - w')/m of the fixed-point term for the bundle of
    anti-self-dual 2-forms."""
    return Fraction(2 - s.w - w_prime(s), s.m)


def fixed_point_term_general(s: CyclicSingularity, dim_g: int, prec: int | None = None) -> Fraction:
    """(1/m) sum_k (chi(k) - dim G) / det(1 - g_k) for the adjoint weights of ``s``.

    The determinant is taken on the cotangent space, (1 - zeta^-k)(1 - zeta^-kw).
    The sum is rationalized with denominator bound 4m^2 and, when the weights
    are those of the anti-self-dual 2-forms, checked against the closed form.
    """
    if s.adjoint_weights is None or len(s.adjoint_weights) != dim_g:
        raise MissingWeights(
            f"singularity (m={s.m}, w={s.w}) needs {dim_g} adjoint weights, "
            f"got {s.adjoint_weights!r}"
        )
    if prec is None:
        prec = default_precision()
    ctx = mp_context(prec)
    m, w = s.m, s.w
    total = ctx.mpc(0)
    for k in range(1, m):
        det = (1 - _zeta(ctx, m, -k)) * (1 - _zeta(ctx, m, -k * w))
        char_diff = sum((_zeta(ctx, m, k * u) - 1 for u in s.adjoint_weights), ctx.mpc(0))
        total += char_diff / det
    total /= m
    _check_real(ctx, total, prec)
    value = rationalize(total.real, 4 * m * m, prec)
    if sorted(s.adjoint_weights) == sorted(s.asd_weights()):
        closed = fixed_point_term_adjoint_so3(s)
        if value != closed:
            raise RationalizationFailed(
                f"numeric fixed-point term {value} disagrees with closed form {closed}"
            )
    return value


def fixed_point_term_sine_form(s: CyclicSingularity, prec: int | None = None):
    """-(1/2m) sum_k sum_l sin^2(pi k u_l/m)(1 - cot(pi k/m) cot(pi k w/m)).

    Agrees with :func:`fixed_point_term_general` when the weight multiset is
    symmetric under u -> -u. Returned unrationalized (mpf).
    """
    if s.adjoint_weights is None:
        raise MissingWeights("sine form needs adjoint weights")
    ctx = mp_context(prec)
    m, w = s.m, s.w
    total = ctx.mpf(0)
    for k in range(1, m):
        cc = 1 - ctx.cot(ctx.pi * k / m) * ctx.cot(ctx.pi * ((k * w) % m) / m)
        total += sum(ctx.sin(ctx.pi * k * u / m) ** 2 for u in s.adjoint_weights) * cc
    return -total / (2 * m)


# ----------------------------------------------------------------- indices


def index_general(
    p1b_gp: RationalLike,
    dim_g: int,
    b1_b: int,
    bplus_b: int,
    sings: Iterable[CyclicSingularity],
    *,
    asd_closed_form: bool = False,
    prec: int | None = None,
) -> Fraction:
    """ind = p1_B(g_P)[X] + (dim G / 2)(1 - b1_B + b+_B) + sum of fixed-point terms.

    A singularity without adjoint weights is allowed only when ``dim_g == 3``
    and ``asd_closed_form`` selects the anti-self-dual 2-form bundle.
    A fractional result triggers :class:`IntegralityWarning`.
    """
    _require_int("dim_g", dim_g, 1)
    _require_int("b1_b", b1_b, 0)
    _require_int("bplus_b", bplus_b, 0)
    total = parse_rational(p1b_gp) + Fraction(dim_g, 2) * (1 - b1_b + bplus_b)
    for s in sings:
        if s.adjoint_weights is not None:
            total += fixed_point_term_general(s, dim_g, prec)
        elif asd_closed_form and dim_g == 3:
            total += fixed_point_term_adjoint_so3(s)
        else:
            raise MissingWeights(f"singularity (m={s.m}, w={s.w}) carries no adjoint weights")
    if total.denominator != 1:
        warnings.warn(f"index {total} is not an integer; inputs are inconsistent", IntegralityWarning)
    return total


def asd_summand(s: CyclicSingularity) -> Fraction:
    """2 - (w + w')/m + 12 s(w; m); always an integer."""
    value = 2 - Fraction(s.w + w_prime(s), s.m) + 12 * dedekind_sum(s.w, s.m)
    if value.denominator != 1:
        raise InconsistentFormulas(f"summand for (m={s.m}, w={s.w}) is {value}, not an integer")
    return value


def index_asd_bundle(top: BasicTopology, sings: Iterable[CyclicSingularity]) -> Fraction:
    """Index for g_P = anti-self-dual 2-forms:
    (5/4)(3 tau_B - chi_B) + sum_j (2 - (w_j + w'_j)/m_j + 12 s(w_j; m_j))."""
    if top.tau_b is None or top.chi_b is None:
        raise ValidationError("index_asd_bundle needs tau_B and chi_B")
    total = Fraction(5, 4) * (3 * top.tau_b - top.chi_b)
    for s in sings:
        total += asd_summand(s)
    if total.denominator != 1:
        warnings.warn(f"index {total} is not an integer; inputs are inconsistent", IntegralityWarning)
    return total


def duval_summand(m: int) -> Fraction:
    """Per-point summand at an A_{m-1} du Val singularity (equals 3 - m)."""
    return asd_summand(CyclicSingularity.du_val(m))


def _check_orders(orders: Sequence[int]) -> list[int]:
    return [_require_int("order", m, 2) for m in orders]


def cy_k3_dimension(orders: Sequence[int]) -> K3Dimension:
    """Moduli dimension -ind and h^{1,1} for a transverse Calabi-Yau leaf
    space with A_{m_j - 1} points.

    -ind = 90 - 2 sum(2 m_j - 1) and h^{1,1} = 20 - sum(m_j - 1); the two are
    cross-checked against -ind = 5 h^{1,1} - 10 + sum(m_j - 3).
    """
    orders = _check_orders(orders)
    neg_index = 90 - 2 * sum(2 * m - 1 for m in orders)
    h11 = Fraction(20 - sum(m - 1 for m in orders))
    via_h11 = 5 * h11 - 10 + sum(m - 3 for m in orders)
    if via_h11 != neg_index:
        raise InconsistentFormulas(f"-ind = {neg_index} but 5 h11 - 10 + sum(m-3) = {via_h11}")
    if h11 < 0:
        raise NegativeH11(f"h11 = {h11} < 0: no such orbifold K3")
    return K3Dimension(neg_index, h11)


def flatness_obstruction(orders: Sequence[int]) -> Flatness:
    """sum (m_j^2 - 1)/m_j; the leaf space can only be flat when this is 24."""
    orders = _check_orders(orders)
    value = sum((Fraction(m * m - 1, m) for m in orders), Fraction(0))
    return Flatness(value, value == 24)


def signature_bookkeeping(
    p1b_h: RationalLike, eb_h: RationalLike, sings: Iterable[CyclicSingularity]
) -> Bookkeeping:
    """Orbifold signature and Gauss-Bonnet corrections.

    tau_B = p1_B(H)/3 - 4 sum s(w_j; m_j), chi_B = e_B(H) + sum (1 - 1/m_j),
    p1_B(anti-self-dual 2-forms) = p1_B(H) - 2 e_B(H).
    """
    p1 = parse_rational(p1b_h)
    e = parse_rational(eb_h)
    sings = list(sings)
    tau = p1 / 3 - 4 * sum((dedekind_sum(s.w, s.m) for s in sings), Fraction(0))
    chi = e + sum((1 - Fraction(1, s.m) for s in sings), Fraction(0))
    return Bookkeeping(tau, chi, p1 - 2 * e)


def basic_p1_su2(lambda_over_2pi: RationalLike, omega2_integral: RationalLike) -> Fraction:
    """p_{1,B}(L + L*) paired with the volume: (lambda/2pi)^2 * int omega^2.

    L is the trivial line bundle with connection d + i lambda eta.
    """
    lam = parse_rational(lambda_over_2pi)
    vol = parse_rational(omega2_integral)
    if vol < 0:
        raise ValidationError("integral of omega^2 must be nonnegative")
    return lam * lam * vol


def u1_moduli_descriptor(d: ModuliDescriptorU1) -> U1Moduli:
    """Shape of the U(1) contact-instanton moduli group.

    Components are tori T^{b1} in the ASD case and R x T^{b1} in the SD case;
    the component group is the lattice part plus torsion of H^2(M, Z).
    """
    torus = f"T^{d.b1}"
    topology = torus if d.duality is Duality.ASD else f"R x {torus}"
    return U1Moduli(d.lattice_rank, d.torsion_orders, topology)
