from fractions import Fraction

import pytest

from errors import NonUnitError
from field_tower import FieldTower
from hahn_series import HahnSeries, SeriesBudget
from root_solvers import (artin_schreier_kernel, enumerate_artin_schreier, solve_artin_schreier,
                          solve_radical)


@pytest.fixture
def tower():
    return FieldTower(2, 1)


def _residual(gamma, beta, x):
    return gamma * x.q_power(1) - x + beta


def test_radical_of_unit_series(tower):
    spec = tower.base
    c = HahnSeries(spec, [0, 1], [1, 1], cap=4)
    root = solve_radical(c, 3, tower, prec=3)
    assert root.cap == 3
    assert (root ** 3).agrees_with(c)


def test_radical_of_exact_monomial(tower):
    c = HahnSeries(tower.base, [1], [1])
    root = solve_radical(c, 3, tower)
    assert root.is_exact()
    assert root.exps == (Fraction(1, 3),)


def test_radical_degree_must_be_prime_to_p(tower):
    with pytest.raises(ValueError):
        solve_radical(HahnSeries.one(tower.base), 2, tower, prec=1)


def test_branches_of_simple_equation(tower):
    # u^-1 x^2 - x + u^2 = 0 has roots u^2 + u^3 + ... and u + u^2 + u^3 + ...
    spec = tower.base
    gamma = HahnSeries(spec, [-1], [1])
    beta = HahnSeries(spec, [2], [1])
    high = solve_artin_schreier(gamma, beta, 1, tower, 4, "max-val")
    low = solve_artin_schreier(gamma, beta, 1, tower, 4, "min-val")
    assert high.exps == (2, 3)
    assert high.cap == 4
    assert low.exps == (1, 2, 3)
    for root in (high, low):
        assert _residual(gamma, beta, root).is_zero()


def test_enumeration_order(tower):
    spec = tower.base
    gamma = HahnSeries(spec, [-1], [1])
    beta = HahnSeries(spec, [2], [1])
    roots = enumerate_artin_schreier(gamma, beta, 1, tower, 4)
    assert len(roots) == 2
    assert roots[0].valuation() == 2
    assert roots[1].valuation() == 1
    assert solve_artin_schreier(gamma, beta, 1, tower, 4, 1) == roots[1]


def test_kernel_generator(tower):
    gamma = HahnSeries(tower.base, [-1], [1])
    z = artin_schreier_kernel(gamma, 1, tower, 3)
    assert z.exps == (1,)
    assert (gamma * z.q_power(1) - z).is_zero()
    assert artin_schreier_kernel(gamma, 1, tower, 1).is_zero()


def test_accumulating_root_stops_at_denominator_bound(tower):
    # x^2 + u x + u = 0, i.e. u^-1 x^2 - x + 1 = 0: root u^(1/2) + u^(3/4) + u^(7/8) + ...
    budget = SeriesBudget(max_terms=32, max_denom=8)
    spec = tower.base
    gamma = HahnSeries(spec, [-1], [1], budget=budget)
    beta = HahnSeries.one(spec, budget)
    root = solve_artin_schreier(gamma, beta, 1, tower, 1)
    assert root.exps == (Fraction(1, 2), Fraction(3, 4), Fraction(7, 8))
    assert root.cap == Fraction(15, 16)
    assert _residual(gamma, beta, root).is_zero()


def test_term_budget_lowers_cap(tower):
    budget = SeriesBudget(max_terms=2, max_denom=64)
    spec = tower.base
    gamma = HahnSeries(spec, [-1], [1], budget=budget)
    beta = HahnSeries.one(spec, budget)
    root = solve_artin_schreier(gamma, beta, 1, tower, 1)
    assert len(root) == 2
    assert root.cap == Fraction(7, 8)


def test_invalid_branches(tower):
    spec = tower.base
    gamma = HahnSeries(spec, [-1], [1])
    beta = HahnSeries(spec, [2], [1])
    with pytest.raises(ValueError):
        solve_artin_schreier(gamma, beta, 1, tower, 4, "widest")
    with pytest.raises(ValueError):
        solve_artin_schreier(gamma, beta, 1, tower, 4, 5)
    with pytest.raises(NonUnitError):
        solve_artin_schreier(HahnSeries.zero(spec, 1), beta, 1, tower, 4)
