from fractions import Fraction

import pytest

from errors import PoleAtPlaceError
from exact_scalar import ExactScalar, parse_scalar
from field_tower import base_spec
from hahn_series import INF
from validators import ValidationError


@pytest.fixture
def f2():
    return base_spec(2, 1)


def test_parse_matches_constructors(f2):
    theta = ExactScalar.theta(f2)
    assert parse_scalar("1/(theta+1)", f2) == (theta + 1).inverse()
    assert parse_scalar("t - theta", f2) == ExactScalar.t_minus_theta(f2)
    assert parse_scalar("θ^2", f2) == theta ** 2


def test_parse_generator_of_base_field():
    f4 = base_spec(2, 2)
    assert parse_scalar("g^2 + g + 1", f4).is_zero()
    assert not parse_scalar("g", f4).is_zero()


@pytest.mark.parametrize("text", ["", "x + 1", "1/2", "g", "1/(2*theta + 2)", "theta +"])
def test_parse_rejects(text, f2):
    with pytest.raises(ValidationError):
        parse_scalar(text, f2)


def test_field_arithmetic(f2):
    x = parse_scalar("theta/(t - theta)", f2)
    y = parse_scalar("(t + theta^2)/(theta + 1)", f2)
    assert x * x.inverse() == 1
    assert (x - x).is_zero()
    assert (x + y) * (x - y) == x * x - y * y
    assert x / y * y == x
    with pytest.raises(ZeroDivisionError):
        (x - x).inverse()


def test_sigma_twists_theta_only(f2):
    x = parse_scalar("t + theta", f2)
    assert x.sigma() == parse_scalar("t + theta^2", f2)
    y = parse_scalar("1/(theta + t^2)", f2)
    assert (x * y).sigma() == x.sigma() * y.sigma()
    assert x.sigma(2) == x.sigma().sigma()


def test_predicates(f2):
    assert parse_scalar("theta + 1", f2).is_t_free()
    assert not parse_scalar("theta + t", f2).is_t_free()
    assert parse_scalar("t^3 + 1", f2).is_theta_free()
    assert parse_scalar("t^3 + theta", f2).t_degree() == 3


def test_theta_valuation(f2):
    assert parse_scalar("1/(theta+1)", f2).theta_valuation(f2.one()) == -1
    assert parse_scalar("theta^3", f2).theta_valuation(f2.zero()) == 3
    assert parse_scalar("theta^3", f2).theta_valuation(f2.one()) == 0


def test_expansion_of_inverse_t_minus_theta(f2):
    # 1/(t - theta) = sum_k t^k u^-(k+1) in characteristic 2 at t = theta = 0
    x = ExactScalar.t_minus_theta(f2, -1)
    coeffs, tail = x.expand_at(f2.zero(), f2.zero(), 3, 4)
    assert [c.exps for c in coeffs] == [(-1,), (-2,), (-3,)]
    assert tail == (-1, -1)


def test_polynomial_expansion_tail(f2):
    x = parse_scalar("t^2 + theta", f2)
    coeffs, tail = x.expand_at(f2.zero(), f2.zero(), 2, 4)
    assert tail == (Fraction(0), Fraction(0))
    assert coeffs[0].exps == (1,)
    assert coeffs[1].is_zero()
    _, tail = x.expand_at(f2.zero(), f2.zero(), 3, 4)
    assert tail == (0, INF)


def test_pole_at_place(f2):
    with pytest.raises(PoleAtPlaceError):
        parse_scalar("1/t", f2).expand_at(f2.zero(), f2.zero(), 2, 4)


def test_text_form(f2):
    assert str(parse_scalar("theta^2 + t", f2)) == "t + theta^2"
    assert str(parse_scalar("1/(theta+1)", f2)) == "(1)/(theta + 1)"
    assert str(ExactScalar.from_int(f2, 0)) == "0"
