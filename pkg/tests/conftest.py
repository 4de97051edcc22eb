"""
Shared fixtures: sessions at small places and seeded random series
"""
from fractions import Fraction

import numpy as np
import pytest

from field_tower import FieldElement
from hahn_series import HahnSeries, SeriesBudget
from session import Session


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def session_q2():
    """q = 2, v = t"""
    return Session.create(p=2, v=[0, 1])


@pytest.fixture
def session_q3():
    """q = 3, v = t"""
    return Session.create(p=3, v=[0, 1])


@pytest.fixture
def session_q2_d2():
    """q = 2, v = t^2 + t + 1"""
    return Session.create(p=2, v=[1, 1, 1])


@pytest.fixture
def budget():
    return SeriesBudget(max_terms=64, max_denom=64)


def random_series(rng, spec, budget, terms=4, cap=None, low=-2, high=3, denom=4):
    """Random series with exponents in [low, high) on the grid (1/denom)Z"""
    grid = sorted({Fraction(int(k), denom) for k in rng.integers(low * denom, high * denom, size=terms)})
    pairs = [(e, FieldElement(spec, int(rng.integers(1, spec.order)))) for e in grid]
    if cap is None:
        cap = Fraction(high) + Fraction(int(rng.integers(0, 4)), denom)
    return HahnSeries.from_terms(pairs, cap, budget, spec=spec)
