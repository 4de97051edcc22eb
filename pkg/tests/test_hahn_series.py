from fractions import Fraction

import pytest

from conftest import random_series
from errors import DenominatorBoundExceeded, HypothesisError, NonUnitError, PrecisionError
from field_tower import FieldElement, base_spec, extend
from hahn_series import INF, HahnSeries, SeriesBudget, default_max_denom, newton_polygon


@pytest.fixture
def spec():
    return extend(base_spec(2, 1), 2)


def _random_pair(rng, spec, budget):
    return random_series(rng, spec, budget), random_series(rng, spec, budget)


def test_default_denominator_bound():
    assert default_max_denom(2, 1) == 4096
    assert default_max_denom(2, 2) == 6144
    assert default_max_denom(3, 1) == 4374


def test_constructor_drops_terms_at_or_above_cap(spec):
    x = HahnSeries(spec, [0, 1, 2], [1, 1, 1], cap=Fraction(3, 2))
    assert x.exps == (0, 1)
    assert x.cap == Fraction(3, 2)


def test_denominator_bound_is_enforced(spec):
    with pytest.raises(DenominatorBoundExceeded):
        HahnSeries(spec, [Fraction(1, 3)], [1], budget=SeriesBudget(max_denom=4))


def test_term_budget_lowers_cap(spec):
    x = HahnSeries(spec, [0, 1, 2, 3], [1, 1, 1, 1], budget=SeriesBudget(max_terms=2))
    assert len(x) == 2
    assert x.cap == 2


def test_ring_axioms(rng, spec, budget):
    for _ in range(100):
        a, b = _random_pair(rng, spec, budget)
        c = random_series(rng, spec, budget)
        assert (a + b).agrees_with(b + a)
        assert (a * b).agrees_with(b * a)
        assert ((a + b) + c).agrees_with(a + (b + c))
        assert ((a * b) * c).agrees_with(a * (b * c))
        assert (a * (b + c)).agrees_with(a * b + a * c)
        assert (a - a).is_zero()


@pytest.mark.slow
def test_ring_axioms_extended(rng, spec, budget):
    for _ in range(500):
        a, b = _random_pair(rng, spec, budget)
        c = random_series(rng, spec, budget)
        assert ((a * b) * c).agrees_with(a * (b * c))
        assert (a * (b + c)).agrees_with(a * b + a * c)


def test_valuation_laws(rng, spec, budget):
    for _ in range(100):
        a, b = _random_pair(rng, spec, budget)
        if a.is_zero() or b.is_zero():
            continue
        product = a * b
        if product.cap > a.valuation() + b.valuation():
            assert product.valuation() == a.valuation() + b.valuation()
        total = a + b
        assert total.valuation() >= min(a.valuation(), b.valuation())


def test_multiplication_cap(spec):
    a = HahnSeries(spec, [1], [1], cap=3)
    b = HahnSeries(spec, [0], [1], cap=Fraction(5, 2))
    # min(3 + 0, 5/2 + 1)
    assert (a * b).cap == 3


def test_q_power_is_ring_homomorphism(rng, spec, budget):
    for _ in range(200):
        a, b = _random_pair(rng, spec, budget)
        assert (a * b).q_power(1).agrees_with(a.q_power(1) * b.q_power(1))
        assert (a + b).q_power(1).agrees_with(a.q_power(1) + b.q_power(1))


def test_q_power_scales_exponents_and_cap(spec):
    g = FieldElement(spec, 2)
    x = HahnSeries.from_terms([(Fraction(1, 2), g)], cap=2, spec=spec)
    y = x.q_power(1)
    assert y.exps == (1,)
    assert y.cap == 4
    assert y.coefficient(1) == g * g


def test_inverse(rng, spec, budget):
    for _ in range(50):
        a = random_series(rng, spec, budget)
        if a.is_zero():
            continue
        inv = a.inv()
        product = a * inv
        assert product.agrees_with(HahnSeries.one(spec, budget))
        assert inv.cap == a.cap - 2 * a.valuation()


def test_exact_inverse_needs_target(spec):
    x = HahnSeries(spec, [0, 1], [1, 1])
    with pytest.raises(PrecisionError):
        x.inv()
    inv = x.inv(5)
    assert inv.cap == 5
    assert [int(c) for c in inv.coeffs] == [1] * 5  # 1/(1+u) = 1 + u + u^2 + ... in char 2


def test_monomial_inverse_is_exact(spec):
    x = HahnSeries.monomial(FieldElement(spec, 3), Fraction(-1, 2))
    inv = x.inv()
    assert inv.is_exact()
    assert (x * inv) == HahnSeries.one(spec)


def test_zero_has_no_leading_term(spec):
    with pytest.raises(NonUnitError):
        HahnSeries.zero(spec, cap=1).leading()
    with pytest.raises(NonUnitError):
        HahnSeries.zero(spec, cap=1).inv()


def test_serialization_round_trip(rng, spec, budget):
    a = random_series(rng, spec, budget)
    assert HahnSeries.from_dict(a.to_dict(), spec, budget) == a
    assert HahnSeries.zero(spec).to_dict()["cap"] == "inf"


def test_newton_polygon_slopes():
    # X^2 + u X + u: points (0,1), (1,1), (2,0)
    hull = newton_polygon([(0, 1), (1, 1), (2, 0)])
    assert hull.root_valuations() == [(Fraction(1, 2), 2)]
    # theta X^2 + X + theta: points (0,1), (1,0), (2,1)
    hull = newton_polygon([(0, 1), (1, 0), (2, 1)])
    assert sorted(v for v, _ in hull.root_valuations()) == [-1, 1]


def test_newton_polygon_ignores_infinite_points():
    hull = newton_polygon([(0, INF), (1, 0), (2, -1)])
    assert hull.root_valuations() == [(1, 1)]
    with pytest.raises(HypothesisError):
        newton_polygon([(0, 1)])
