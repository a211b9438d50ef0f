"""Transverse curvature of the local Y^{p,q} leaf-space metric

    g_T = d rho^2 / Delta + (rho^2 / 4)(sigma_1^2 + sigma_2^2 + Delta sigma_3^2),
    Delta = 1 + 4(a - 1) / (27 rho^4) - rho^2,

computed from Cartan's structure equations in the orthonormal coframe
e^1 = rho sigma_1 / 2, e^2 = rho sigma_2 / 2, e^3 = rho sqrt(Delta) sigma_3 / 2,
e^4 = d rho / sqrt(Delta). Every coefficient depends on rho alone, so the
derivatives come from (nested) dual numbers.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .dual import Dual, real_part, sqrt
from .errors import ConventionError, DegenerateMetric, NoWitness, ValidationError

# d sigma_i = -c sigma_j ^ sigma_k (cyclic); tried in this order
MAURER_CARTAN_CONVENTIONS = (1, 2)
SELF_CHECK_TOL = 1e-8

_PAIRS = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
_R2 = 1 / math.sqrt(2)
# rows: e12 - e34, e13 + e24, e14 - e23 (normalized)
ASD_BASIS = np.array(
    [[1, 0, 0, 0, 0, -1], [0, 1, 0, 0, 1, 0], [0, 0, 1, -1, 0, 0]], dtype=float
) * _R2
# rows: e12 + e34, e13 - e24, e14 + e23
SD_BASIS = np.array(
    [[1, 0, 0, 0, 0, 1], [0, 1, 0, 0, -1, 0], [0, 0, 1, 1, 0, 0]], dtype=float
) * _R2


def delta_fn(a, rho):
    """Delta(a, rho) = 1 + 4(a-1)/(27 rho^4) - rho^2. Accepts dual numbers."""
    if not real_part(rho) > 0:
        raise ValidationError(f"rho must be positive, got {rho}")
    return 1 + 4 * (a - 1) / (27 * rho**4) - rho**2


def asd_eigenvalue_formulas(a: float, rho: float) -> tuple[float, float, float]:
    """Closed-form eigenvalues on e12 - e34, e13 + e24, e14 - e23."""
    d = delta_fn(a, rho)
    first = (8 - 8 * d) / rho**2 - 6
    other = (4 * d - 4) / rho**2 + 6
    return (first, other, other)


@dataclass(frozen=True)
class MetricParams:
    a: float
    rho: float

    def __post_init__(self):
        if not 0 < self.a < 1:
            raise ValidationError(f"a must lie in (0, 1), got {self.a}")
        if not self.rho > 0:
            raise ValidationError(f"rho must be positive, got {self.rho}")
        if not delta_fn(self.a, self.rho) > 0:
            raise DegenerateMetric(
                f"Delta({self.a}, {self.rho}) = {delta_fn(self.a, self.rho)} <= 0"
            )

    @property
    def delta(self) -> float:
        return delta_fn(self.a, self.rho)


@dataclass(frozen=True)
class CurvatureReport:
    asd_eigenvalues: tuple[float, float, float]
    bt_norm: float
    s_t: float
    einstein_residual: float
    bianchi_residual: float
    convention: int
    operator: tuple[tuple[float, ...], ...]

    def to_json(self) -> dict:
        return {
            "asdEigenvalues": list(self.asd_eigenvalues),
            "bTNorm": self.bt_norm,
            "sT": self.s_t,
            "einsteinResidual": self.einstein_residual,
            "bianchiResidual": self.bianchi_residual,
            "mcConvention": f"d sigma_i = -{self.convention} sigma_j ^ sigma_k",
        }


# ------------------------------------------------------------ Cartan calculus


def _coframe(a, rho):
    d = delta_fn(a, rho)
    root = sqrt(d)
    return (rho / 2, rho / 2, rho * root / 2), 1 / root


def _structure_coefficients(a, rho, mc: int):
    """A[i][j][k] with de^i = 1/2 sum_jk A[i][j][k] e^j ^ e^k (e^4 is index 3)."""
    seeded, h_seeded = _coframe(a, Dual(rho, 1.0))
    f = [x.re for x in seeded]
    fp = [x.du for x in seeded]
    h = h_seeded.re
    A = [[[0.0] * 4 for _ in range(4)] for _ in range(4)]
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        radial = fp[i] / (f[i] * h)
        A[i][3][i] = radial
        A[i][i][3] = -radial
        twist = -mc * f[i] / (f[j] * f[k])
        A[i][j][k] = twist
        A[i][k][j] = -twist
    return A, h


def _connection(A):
    """Levi-Civita forms omega_ab = sum_c G[a][b][c] e^c, antisymmetric in ab."""
    return [
        [[(A[a][b][c] - A[b][a][c] - A[c][a][b]) / 2 for c in range(4)] for b in range(4)]
        for a in range(4)
    ]


def _du(x):
    return x.du if isinstance(x, Dual) else 0.0


def _re(x):
    return x.re if isinstance(x, Dual) else x


def curvature_tensor(a: float, rho: float, mc: int = 1) -> np.ndarray:
    """R[a, b, k, l] with Omega_ab = 1/2 R_abkl e^k ^ e^l."""
    A_dual, h_dual = _structure_coefficients(a, Dual(rho, 1.0), mc)
    A = np.array([[[_re(x) for x in row] for row in plane] for plane in A_dual])
    h = _re(h_dual)
    G_dual = _connection(A_dual)
    G = np.array([[[_re(x) for x in row] for row in plane] for plane in G_dual])
    G_prime = np.array([[[_du(x) for x in row] for row in plane] for plane in G_dual])

    R = np.zeros((4, 4, 4, 4))
    for x in range(4):
        for y in range(4):
            F = np.einsum("c,ckl->kl", G[x, y], A)
            # d(G_xyc) ^ e^c = G'_xyc / h  e^4 ^ e^c
            F[3, :] += G_prime[x, y] / h
            F[:, 3] -= G_prime[x, y] / h
            wedge = np.einsum("zp,zq->pq", G[x], G[:, y])
            F += wedge - wedge.T
            R[x, y] = F
    return R


def _report(a: float, rho: float, mc: int) -> tuple[CurvatureReport, float]:
    R = curvature_tensor(a, rho, mc)
    M = np.array([[R[i, j, k, l] for (k, l) in _PAIRS] for (i, j) in _PAIRS])
    action = M.T
    asd_block = ASD_BASIS @ action @ ASD_BASIS.T
    cross = SD_BASIS @ action @ ASD_BASIS.T
    eig = tuple(float(x) for x in np.diag(asd_block))
    s_t = 4 * float(np.trace(asd_block))
    ric = np.einsum("abad->bd", R)
    report = CurvatureReport(
        asd_eigenvalues=eig,
        bt_norm=float(np.linalg.norm(cross)),
        s_t=s_t,
        einstein_residual=float(np.abs(ric - s_t / 4 * np.eye(4)).max()),
        bianchi_residual=float(np.abs(M - M.T).max()),
        convention=mc,
        operator=tuple(tuple(float(v) for v in row) for row in action),
    )
    return report, float(np.abs(M).max())


def _eigen_residual(report: CurvatureReport, a: float, rho: float) -> float:
    action = np.array(report.operator)
    expected = asd_eigenvalue_formulas(a, rho)
    return max(
        float(np.linalg.norm(action @ form - lam * form))
        for form, lam in zip(ASD_BASIS, expected)
    )


def transverse_curvature(m: MetricParams) -> CurvatureReport:
    """Curvature operator of g_T on 2-forms, restricted to the checks we need.

    Each Maurer-Cartan convention is tried in turn; the first whose metric is
    transverse Einstein with the expected anti-self-dual spectrum is kept.
    """
    failures = []
    for mc in MAURER_CARTAN_CONVENTIONS:
        report, scale = _report(m.a, m.rho, mc)
        tol = SELF_CHECK_TOL * max(1.0, scale)
        worst = max(
            report.einstein_residual, report.bt_norm, _eigen_residual(report, m.a, m.rho)
        )
        if worst < tol:
            return report
        failures.append(f"c={mc}: residual {worst:.3g}")
    raise ConventionError(
        f"no Maurer-Cartan convention passes at a={m.a}, rho={m.rho}: " + "; ".join(failures)
    )


@dataclass(frozen=True)
class EigenCheck:
    max_residual: float
    passed: bool


def verify_eigenforms(m: MetricParams, tol: float = 1e-8) -> EigenCheck:
    """Largest deviation between R_T on the three anti-self-dual forms and
    the closed-form eigenvalues; passes when below ``tol``."""
    if not tol > 0:
        raise ValidationError("tol must be positive")
    report = transverse_curvature(m)
    residual = _eigen_residual(report, m.a, m.rho)
    return EigenCheck(residual, residual < tol)


# ------------------------------------------------------------- rho domain


def _bisect(f, lo: float, hi: float, tol: float = 1e-12) -> float:
    flo = f(lo) > 0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if (f(mid) > 0) == flo:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def valid_rho_interval(a: float) -> tuple[float, float]:
    """Endpoints of the interval of rho where Delta > 0."""
    if not 0 < a < 1:
        raise ValidationError(f"a must lie in (0, 1), got {a}")
    kappa = 4 * (1 - a) / 27
    peak = (2 * kappa) ** (1 / 6)
    f = lambda r: delta_fn(a, r)  # noqa: E731
    if not f(peak) > 0:
        raise DegenerateMetric(f"Delta <= 0 for every rho at a={a}")
    left = _bisect(f, peak * 1e-3, peak)
    right = _bisect(f, peak, 1.0)
    return left, right


def sample_grid(a_values=(0.1, 0.3, 0.5, 0.7, 0.9), fractions=(0.1, 0.3, 0.5, 0.7, 0.9)):
    """(a, rho) samples strictly inside the Delta > 0 range."""
    out = []
    for a in a_values:
        lo, hi = valid_rho_interval(a)
        out.extend((a, lo + t * (hi - lo)) for t in fractions)
    return out


@dataclass(frozen=True)
class Witness:
    rho: float
    value: float
    computed: float

    def to_json(self) -> dict:
        return asdict(self)


WITNESS_THRESHOLD = 1e-3


def irreducibility_witness(a: float, samples: int = 200) -> Witness:
    """A rho where the repeated anti-self-dual eigenvalue (4 Delta - 4)/rho^2 + 6
    is far from zero, so (R_T)^-_- has rank > 1 there.

    Scans an interior grid of the Delta > 0 interval and returns the sample of
    largest magnitude, confirmed against the computed curvature.
    """
    lo, hi = valid_rho_interval(a)
    best_rho, best = None, 0.0
    for i in range(samples):
        rho = lo + (i + 0.5) / samples * (hi - lo)
        value = asd_eigenvalue_formulas(a, rho)[1]
        if abs(value) > abs(best):
            best_rho, best = rho, value
    if best_rho is None or abs(best) <= WITNESS_THRESHOLD:
        raise NoWitness(f"no rho with |eigenvalue| > {WITNESS_THRESHOLD} at a={a}")
    computed = transverse_curvature(MetricParams(a, best_rho)).asd_eigenvalues[1]
    return Witness(best_rho, best, computed)
