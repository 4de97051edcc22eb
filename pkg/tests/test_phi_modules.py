import pytest

from errors import (HypothesisError, NotSigmaFixedError, PrecisionError, ShapeMismatchError,
                    SingularMatrixError)
from exact_scalar import ExactScalar
from field_tower import FieldElement
from period_solvers import carlitz_motive, solve_omega
from phi_modules import (PhiMatrix, ambiguity, base_change, constant_matrix, direct_sum, dual,
                         gamma_act, kronecker, phi_fixed_basis_check, verify_fundamental)
from relation_lab import build_polylog_motive
from session import Session


@pytest.fixture
def omega_pair(session_q2):
    return carlitz_motive(session_q2, n_t=4)["pair"]


@pytest.fixture
def trivial_pair(session_q2):
    phi = PhiMatrix.identity(session_q2.base, 1)
    return verify_fundamental(session_q2, phi, constant_matrix(session_q2, [["t + 1"]]))["pair"]


def _phi(session, rows):
    return PhiMatrix([[session.scalar(x) for x in row] for row in rows])


def test_exact_determinant_and_inverse(session_q2):
    phi = _phi(session_q2, [["t", "theta"], ["1", "t"]])
    assert phi.det() == session_q2.scalar("t^2 - theta")
    assert phi @ phi.inverse() == PhiMatrix.identity(session_q2.base, 2)
    with pytest.raises(SingularMatrixError):
        _phi(session_q2, [["t", "t"], ["1", "1"]]).inverse()


def test_motive_data_is_checked(session_q2):
    base = session_q2.base
    assert PhiMatrix.carlitz(base, 2).det() == ExactScalar.t_minus_theta(base, 2)
    with pytest.raises(HypothesisError):
        PhiMatrix.scalar(session_q2.scalar("t"), (ExactScalar.from_int(base, 1), 1))
    with pytest.raises(ShapeMismatchError):
        PhiMatrix([[session_q2.scalar("t")], [session_q2.scalar("1")]])


def test_phi_round_trip(session_q2):
    phi = PhiMatrix.carlitz(session_q2.base, 3)
    again = PhiMatrix.from_dict(phi.to_dict(), session_q2.base)
    assert again == phi
    assert again.motive[1] == 3


def test_constant_period_matrix(session_q2):
    phi = PhiMatrix.identity(session_q2.base, 2)
    psi = constant_matrix(session_q2, [["t", "1"], ["0", "t + 1"]])
    result = verify_fundamental(session_q2, phi, psi)
    assert result["passed"]
    assert result["pair"].r == 2


def test_non_solution_is_reported(session_q2):
    phi = PhiMatrix.identity(session_q2.base, 1)
    result = verify_fundamental(session_q2, phi, constant_matrix(session_q2, [["theta + 1"]]))
    assert not result["passed"]
    assert result["pair"] is None
    assert result["worst_entry"]["row"] == 0


def test_shape_and_unit_checks(session_q2):
    phi = PhiMatrix.identity(session_q2.base, 2)
    with pytest.raises(ShapeMismatchError):
        verify_fundamental(session_q2, phi, constant_matrix(session_q2, [["1"]]))
    with pytest.raises(SingularMatrixError):
        verify_fundamental(session_q2, PhiMatrix.identity(session_q2.base, 1),
                           constant_matrix(session_q2, [["0"]]))


def test_carlitz_pair_verifies(omega_pair):
    assert omega_pair is not None
    assert omega_pair.verified_cap > 0
    data = omega_pair.to_dict()
    assert data["phi"] == [["t + theta"]]
    assert data["motive"] == {"c": "1", "s": 1}


def test_constructions_on_carlitz_pair(omega_pair, trivial_pair):
    assert direct_sum(omega_pair, trivial_pair).r == 2
    assert kronecker(omega_pair, trivial_pair).phi == PhiMatrix.carlitz(omega_pair.phi.base)
    with pytest.raises(PrecisionError):
        dual(omega_pair)
    inverse = dual(omega_pair, verify=False)
    assert inverse.phi == PhiMatrix.scalar(ExactScalar.t_minus_theta(omega_pair.phi.base, -1))
    assert phi_fixed_basis_check(trivial_pair)["passed"]
    check = phi_fixed_basis_check(omega_pair)
    assert not check["passed"]
    assert check["reason"] == "precision-shortfall"
    assert check["worst_entry"] is None


def test_kronecker_square_of_carlitz(omega_pair):
    square = kronecker(omega_pair, omega_pair)
    assert square.phi == PhiMatrix.carlitz(omega_pair.phi.base, 2)
    assert square.verified_cap > 0


def test_min_cap_floor(omega_pair, session_q2):
    achieved = omega_pair.verified_cap
    check = verify_fundamental(session_q2, omega_pair.phi, omega_pair.psi, min_cap=achieved)
    assert check["passed"]
    assert check["min_cap"] == str(achieved)
    check = verify_fundamental(session_q2, omega_pair.phi, omega_pair.psi, min_cap=achieved + 1)
    assert not check["passed"]
    assert check["reason"] == "precision-shortfall"
    assert check["pair"] is None
    assert check["worst_entry"] is None


def test_base_change(omega_pair, session_q2):
    M = _phi(session_q2, [["theta"]])
    changed = base_change(omega_pair, M)
    assert changed.phi == _phi(session_q2, [["theta*(t - theta)"]])


def test_gamma_action(omega_pair, session_q2):
    gamma = constant_matrix(session_q2, [["t + 1"]])
    assert gamma_act(omega_pair, gamma).r == 1
    with pytest.raises(NotSigmaFixedError):
        gamma_act(omega_pair, constant_matrix(session_q2, [["theta"]]))


def test_ambiguity_is_sigma_fixed(trivial_pair, session_q2):
    result = ambiguity(trivial_pair, constant_matrix(session_q2, [["t^2 + 1"]]))
    assert result["sigma_fixed"]
    assert result["witness"] is None
    with pytest.raises(HypothesisError):
        ambiguity(trivial_pair, constant_matrix(session_q2, [["theta + t"]]))


def _constants(matrix, count):
    return [[[x.coefficient(0, i).coefficient(0).to_dict() for i in range(count)] for x in row]
            for row in matrix]


def test_ambiguity_recovers_gamma(session_q2):
    phi = PhiMatrix.identity(session_q2.base, 2)
    A = verify_fundamental(session_q2, phi, constant_matrix(session_q2, [["t + 1", "1"], ["0", "1"]]))["pair"]
    gamma = constant_matrix(session_q2, [["1", "t"], ["0", "1"]])
    result = ambiguity(A, gamma_act(A, gamma).psi)
    assert result["status"] == "sigma-fixed"
    assert result["sigma_fixed"] is True
    assert [[entry[:3] for entry in row] for row in result["constants"]] == _constants(gamma, 3)


@pytest.mark.parametrize("p, override", [(2, {1: 1}), (3, {0: 1})])
def test_ambiguity_between_omega_branches(p, override):
    session = Session.create(p=p, v=[0, 1])
    pair = carlitz_motive(session, n_t=4)["pair"]
    other = solve_omega(session, n_t=4, overrides=override).omega
    result = ambiguity(pair, [[other]])
    assert result["status"] == "undetermined"
    assert result["sigma_fixed"] is None
    assert result["witness"]["reason"] == "constant term unknown"
    assert result["constants"] is None


def test_ambiguity_keeps_leading_constant(omega_pair, session_q2):
    other = solve_omega(session_q2, n_t=4, overrides={1: 1}).omega
    delta = ambiguity(omega_pair, [[other]])["delta"][0][0]
    head = delta.coefficient(0, 0)
    assert head.cap > 0
    assert head.coefficient(0) == FieldElement(session_q2.spec, 1)


@pytest.fixture
def polylog_pair(session_q2):
    return build_polylog_motive(session_q2, 1, ["1", "theta"], n_t=2).pair


@pytest.mark.slow
def test_polylog_motive_compositions(polylog_pair, trivial_pair, session_q2):
    assert 0 < polylog_pair.verified_cap < 1
    twice = dual(dual(polylog_pair, verify=False), verify=False)
    assert twice.phi == polylog_pair.phi
    with pytest.raises(PrecisionError):
        dual(polylog_pair)
    for built in (direct_sum(polylog_pair, trivial_pair), kronecker(polylog_pair, trivial_pair)):
        assert 0 < built.verified_cap < 2
    check = verify_fundamental(session_q2, polylog_pair.phi, polylog_pair.psi, min_cap=2)
    assert not check["passed"]
    assert check["reason"] == "precision-shortfall"
