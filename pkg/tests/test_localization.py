import itertools
import random
import warnings
from math import gcd, isqrt

import pytest

from modulidim.errors import NonPolynomial, QuasiRegularWarning, Unsupported, ValidationError
from modulidim.exact import LaurentPoly, RationalFunction, eval_at_one, t_poly
from modulidim.localization import (
    ST,
    ExpansionFactor,
    OrbitContribution,
    Polarization,
    Regularity,
    YpqParams,
    extract_contribution,
    invariant_index,
    invariant_rational_function,
    moduli_dimension,
    oracle_trusted_window,
    quasi_regularity,
    truncated_expansion_oracle,
    ypq_orbit_data,
)

PLUS, MINUS = Polarization.PLUS, Polarization.MINUS
NEG_CUP = t_poly({-1: -1, 0: -1, 1: -1})
TOY = OrbitContribution(LaurentPoly.constant(1, ST), (ExpansionFactor((-1, 0), PLUS),))


def irregular_and_all_pairs(max_p=20):
    for p in range(2, max_p + 1):
        for q in range(1, p):
            if gcd(p, q) == 1:
                yield p, q


@pytest.mark.parametrize(
    "p, q, deltas",
    [
        (2, 1, [(0, 0), (0, -1), (2, 0), (2, 3)]),
        (1, 0, [(0, 0), (0, -1), (1, 0), (1, 1)]),
        (7, 3, [(0, 0), (0, -4), (7, 0), (7, 10)]),
    ],
)
def test_orbit_deltas(p, q, deltas):
    assert [c.delta for c in ypq_orbit_data(YpqParams(p, q))] == deltas


def test_orbit_transcription():
    o00, o01, o10, o11 = ypq_orbit_data(YpqParams(2, 1))
    assert o00.numerator == LaurentPoly({(0, 0): 1, (1, -1): 1, (-1, 1): 1}, ST)
    assert o01.numerator == LaurentPoly({(0, 0): 1, (1, 3): 1, (-1, -3): 1}, ST)
    assert o10.numerator == o00.numerator and o11.numerator == o01.numerator
    assert [(f.monomial, f.polarization) for f in o00.factors] == [((-1, 0), PLUS), ((0, -1), PLUS)]
    assert [(f.monomial, f.polarization) for f in o01.factors] == [((-1, -2), PLUS), ((0, 1), PLUS)]
    assert [(f.monomial, f.polarization) for f in o10.factors] == [((-1, 0), MINUS), ((0, -1), PLUS)]
    assert [(f.monomial, f.polarization) for f in o11.factors] == [((-1, -2), MINUS), ((0, 1), PLUS)]


def test_params_validation():
    for p, q in ((2, 2), (1, 2), (4, 2), (3, -1)):
        with pytest.raises(ValidationError):
            YpqParams(p, q)
    with pytest.raises(ValidationError):
        ExpansionFactor((0, 0))


def test_toy_contribution():
    assert invariant_index([TOY]) == LaurentPoly.constant(1)


def test_partial_orbit_sums():
    o00, o01, o10, o11 = ypq_orbit_data(YpqParams(2, 1))
    first = invariant_rational_function([o00, o10])
    assert first == RationalFunction(t_poly({2: 1, 1: -1, 0: -1}), [1])
    second = invariant_rational_function([o01, o11])
    assert second == RationalFunction(t_poly({0: 1, 1: 1, -1: -1}), [1])
    with pytest.raises(NonPolynomial):
        invariant_index([o00, o10])


def test_headline_y21():
    assert invariant_index(ypq_orbit_data(YpqParams(2, 1))) == NEG_CUP
    assert invariant_index(ypq_orbit_data(YpqParams(2, 1))).compact() == "-(t^-1+1+t)"


def test_all_pairs_up_to_20():
    reference = [extract_contribution(c) for c in ypq_orbit_data(YpqParams(2, 1))]
    for p, q in irregular_and_all_pairs():
        data = ypq_orbit_data(YpqParams(p, q))
        assert invariant_index(data) == NEG_CUP
        # only the deltas depend on (p, q) and they drop out: term-by-term identity
        parts = [extract_contribution(c) for c in data]
        assert [(r.numerator, r.factors) for r in parts] == [(r.numerator, r.factors) for r in reference]


@pytest.mark.parametrize("p, q", [(2, 1), (3, 2), (5, 1)])
def test_moduli_dimension(p, q):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert moduli_dimension(YpqParams(p, q)) == 3


def test_quasi_regular_dimension_warns():
    with pytest.warns(QuasiRegularWarning):
        assert moduli_dimension(YpqParams(7, 3)) == 3


def test_reordering_invariance():
    for p, q in ((2, 1), (5, 3), (9, 4)):
        data = ypq_orbit_data(YpqParams(p, q))
        for perm in itertools.permutations(data):
            assert -eval_at_one(invariant_index(perm)) == 3


@pytest.mark.parametrize(
    "p, q, expected",
    [(1, 0, "QuasiRegular"), (2, 1, "Irregular"), (7, 3, "QuasiRegular"), (3, 1, "Irregular"), (3, 2, "Irregular")],
)
def test_quasi_regularity(p, q, expected):
    assert quasi_regularity(YpqParams(p, q)).value == expected


def test_quasi_regular_has_exact_root():
    for p in range(1, 200):
        for q in range(0, p):
            if gcd(p, q) != 1:
                continue
            disc = 4 * p * p - 3 * q * q
            if quasi_regularity(YpqParams(p, q)) is Regularity.QUASI_REGULAR:
                assert isqrt(disc) ** 2 == disc
            else:
                assert isqrt(disc) ** 2 != disc


def test_two_s_factors_unsupported():
    c = OrbitContribution(
        LaurentPoly.constant(1, ST),
        (ExpansionFactor((1, 0), PLUS), ExpansionFactor((1, 1), PLUS)),
    )
    with pytest.raises(Unsupported):
        invariant_index([c])
    with pytest.raises(Unsupported):
        truncated_expansion_oracle([c], 10)


def test_json_roundtrip():
    for c in ypq_orbit_data(YpqParams(5, 2)):
        assert OrbitContribution.from_json(c.to_json()) == c


# ---------------------------------------------------------------- oracle


def test_oracle_toy():
    assert truncated_expansion_oracle([TOY], 10) == LaurentPoly.constant(1)


@pytest.mark.parametrize("p, q", [(2, 1), (4, 1)])
def test_oracle_on_ypq(p, q):
    series = truncated_expansion_oracle(ypq_orbit_data(YpqParams(p, q)), 30)
    assert [series.coefficient(k) for k in (-1, 0, 1)] == [-1, -1, -1]
    assert series == NEG_CUP


def test_oracle_agrees_on_all_pairs():
    for p, q in irregular_and_all_pairs():
        assert truncated_expansion_oracle(ypq_orbit_data(YpqParams(p, q)), 30) == NEG_CUP


def random_contribution(rng):
    numerator = {}
    for _ in range(rng.randint(1, 4)):
        numerator[(rng.randint(-3, 3), rng.randint(-3, 3))] = rng.randint(-3, 3) or 1
    a = rng.choice([x for x in range(-3, 4) if x])
    factors = [ExpansionFactor((a, rng.randint(-3, 3)), rng.choice([PLUS, MINUS]))]
    for _ in range(rng.randint(0, 2)):
        factors.append(ExpansionFactor((0, rng.choice([-3, -2, -1, 1, 2, 3])), rng.choice([PLUS, MINUS])))
    rng.shuffle(factors)
    delta = (rng.randint(-5, 5), rng.randint(-5, 5))
    return OrbitContribution(LaurentPoly(numerator, ST), tuple(factors), delta)


def test_oracle_agrees_with_engine_on_random_tables():
    rng = random.Random(2024)
    window = 30
    for _ in range(20):
        contribs = [random_contribution(rng) for _ in range(rng.randint(1, 4))]
        lo, hi = oracle_trusted_window(contribs, window)
        expected = invariant_rational_function(contribs).series(lo, hi)
        oracle = truncated_expansion_oracle(contribs, window)
        assert {k[0]: v for k, v in oracle.terms.items()} == expected
