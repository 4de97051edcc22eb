import pytest

from errors import DivergenceError, NonUnitError, PrecisionError, ShapeMismatchError
from field_tower import FieldTower, frobenius_power
from hahn_series import HahnSeries
from validators import ValidationError
from vadic_ring import PlaceData, VadicElement, eval_theta_power, is_sigma_fixed


def test_place_roots_follow_frobenius():
    tower = FieldTower(2, 1)
    place = PlaceData.build(tower, [1, 1, 1])
    assert place.d == 2
    assert tower.current.degree == 2
    lam0, lam1 = place.lambdas
    assert frobenius_power(lam0, 1) == lam1
    assert frobenius_power(lam1, 1) == lam0
    assert place.rotated(1).reference == lam1


def test_reducible_place_is_rejected():
    with pytest.raises(ValidationError, match="v not irreducible"):
        PlaceData.build(FieldTower(2, 1), [1, 0, 1])


def test_inverse_of_t_minus_theta(session_q2):
    x = session_q2.expand("t - theta")
    y = session_q2.expand("1/(t - theta)")
    assert (x * y).agrees_with(session_q2.one())
    assert x.inverse().agrees_with(y)


def test_inverse_of_zero_fails(session_q2):
    with pytest.raises(NonUnitError):
        session_q2.zero().inverse()


def test_sigma_moves_theta_to_theta_q(session_q2_d2):
    theta = session_q2_d2.expand("theta")
    assert theta.sigma().agrees_with(session_q2_d2.expand("theta^2"))
    assert theta.sigma_power(2).agrees_with(session_q2_d2.expand("theta^4"))


def test_sigma_fixed_elements(session_q2_d2):
    fixed, witness = is_sigma_fixed(session_q2_d2.expand("t^2 + 1"))
    assert fixed and witness is None
    fixed, witness = is_sigma_fixed(session_q2_d2.expand("theta"))
    assert not fixed
    assert witness["reason"] == "theta-dependent coefficient"


def test_evaluate_polynomial_in_t(session_q2):
    t = session_q2.expand("t")
    assert eval_theta_power(t, 0).value == HahnSeries(session_q2.spec, [1], [1])
    evaluation = eval_theta_power(t, 1)
    assert evaluation.value.exps == (2,)
    assert evaluation.achieved_cap == float("inf")


def test_evaluate_pole_diverges(session_q2):
    x = session_q2.expand("1/(t - theta)")
    with pytest.raises(DivergenceError):
        eval_theta_power(x, 0)


def test_evaluate_uses_tail_bound(session_q2):
    # 1/(theta^2 - theta) = u^-1 (1 + u + u^2 + ...) at v = t
    x = session_q2.expand("1/(t - theta)")
    evaluation = eval_theta_power(x, 1)
    assert evaluation.achieved_cap == 7
    assert evaluation.value.valuation() == -1
    assert len(evaluation.value) == 8


def test_evaluate_without_tail_bound(session_q2):
    x = session_q2.expand("t - theta").inverse()
    with pytest.raises(PrecisionError):
        eval_theta_power(x, 1)


def test_coefficient_beyond_precision(session_q2):
    x = session_q2.expand("t")
    with pytest.raises(PrecisionError):
        x.coefficient(0, x.n_t)
    assert x.truncate_t(2).n_t == 2
    assert x.coefficient(0, -1).is_zero()


def test_shape_checks(session_q2, session_q2_d2):
    row = [HahnSeries.one(session_q2.spec)]
    with pytest.raises(ShapeMismatchError):
        VadicElement(session_q2_d2.place, [row])
    with pytest.raises(ShapeMismatchError):
        session_q2.one() + session_q2_d2.one()


def test_serialization_round_trip(session_q2_d2):
    x = session_q2_d2.expand("(t + theta)/(theta^2 + theta + 1 + t)")
    data = x.to_dict()
    y = VadicElement.from_dict(data, session_q2_d2.place, session_q2_d2.spec, session_q2_d2.budget)
    assert y.agrees_with(x)
    assert y.tails == x.tails


def test_definite_violation_outranks_unknown_constant(session_q2_d2):
    spec, place = session_q2_d2.spec, session_q2_d2.place
    assert spec.order >= 4
    unknown = HahnSeries(spec, cap=-1)
    g, one = HahnSeries(spec, [0], [2]), HahnSeries(spec, [0], [1])
    fixed, witness = is_sigma_fixed(VadicElement(place, [[unknown, g], [unknown, g]]))
    assert not fixed
    assert witness["reason"] == "a_{l,i}^q != a_{l+1,i}"
    assert witness["i"] == 1
    fixed, witness = is_sigma_fixed(VadicElement(place, [[unknown, one], [unknown, one]]))
    assert not fixed
    assert witness["reason"] == "constant term unknown"
    assert witness["i"] == 0
