from fractions import Fraction

import pytest

from errors import HypothesisError
from period_solvers import (OmegaResult, abp_chain_check, branch_difference_check, carlitz_motive,
                            omega_formula, polylog_bound, polylog_residual, psi_is_zero,
                            solve_omega, solve_polylog, valuation_report)
from phi_modules import PhiMatrix
from vadic_ring import VadicElement


def _with_fault(x: VadicElement, i: int) -> VadicElement:
    """Add 1 to the reference coefficient of (t - lambda)^i"""
    comps = [list(row) for row in x.components]
    comps[0][i] = comps[0][i] + 1
    return VadicElement(x.place, comps, x.i_min, x.n_t, x.tails)


def test_closed_formulas():
    assert omega_formula(2, 1, 0, 3) == Fraction(1, 8)
    assert omega_formula(2, 2, 1, 0) == Fraction(2, 3)
    assert polylog_bound(2, 1, 1, 0, 2) == -2
    assert polylog_bound(3, 2, 2, 1, 0) == Fraction(-3, 4)


def test_omega_valuations_q2(session_q2):
    result = solve_omega(session_q2, n_t=4)
    values = [result.omega.coefficient(0, i).valuation() for i in range(4)]
    assert values == [1, Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)]
    report = valuation_report(result)
    assert report["passed"]
    assert report["relation"] == "equality"
    assert result.branches[0] == "radical"


def test_omega_valuations_q3(session_q3):
    result = solve_omega(session_q3, n_t=3)
    assert result.omega.coefficient(0, 0).valuation() == Fraction(1, 2)
    assert valuation_report(result)["passed"]


def test_omega_at_degree_two_place(session_q2_d2):
    result = solve_omega(session_q2_d2, n_t=2)
    assert result.omega.coefficient(0, 0).valuation() == Fraction(1, 3)
    assert result.omega.coefficient(1, 0).valuation() == Fraction(2, 3)
    assert valuation_report(result)["passed"]


def test_carlitz_motive_denominators(session_q2):
    motive = carlitz_motive(session_q2, n_t=4)
    assert motive["verification"]["passed"]
    assert motive["denominators"] == [1, 2, 4, 8]


def test_omega_branch_override(session_q2):
    result = solve_omega(session_q2, n_t=2, overrides={0: 0})
    assert result.branches == {0: 0, 1: "max-val"}
    with pytest.raises(ValueError):
        solve_omega(session_q2, n_t=2, overrides={0: 5})


def test_valuation_report_flags_fault(session_q2):
    result = solve_omega(session_q2, n_t=3)
    broken = OmegaResult(_with_fault(result.omega, 1), result.branches, session_q2)
    report = valuation_report(broken)
    assert not report["passed"]
    assert report["first_failure"]["i"] == 1
    assert report["first_failure"]["val"] == "0"


def test_polylog_max_branch(session_q2):
    result = solve_polylog(session_q2, "1", n=1, branch="max-val", n_t=3)
    assert result.series.coefficient(0, 0).valuation() == 1
    assert valuation_report(result)["passed"]
    assert polylog_residual(result)["passed"]


def test_polylog_min_branch_meets_bound(session_q2):
    result = solve_polylog(session_q2, "1", n=1, branch="min-val", n_t=3)
    for i in range(3):
        assert result.series.coefficient(0, i).valuation() == -(Fraction(i, 2) + 1)
    report = valuation_report(result)
    assert report["passed"]
    assert report["relation"] == "lower-bound"
    assert polylog_residual(result)["passed"]


def test_polylog_enumeration(session_q2):
    results = solve_polylog(session_q2, "1", n=1, branch="enumerate", n_t=3)
    assert len(results) == 2
    assert [r.branches[0] for r in results] == [0, 1]
    assert branch_difference_check(results[0], results[1])["passed"]


def test_zero_alpha_short_circuits(session_q2):
    result = solve_polylog(session_q2, "0", n=2, n_t=3)
    assert psi_is_zero(result.series)
    assert set(result.branches.values()) == {"zero"}
    assert valuation_report(result)["passed"]


@pytest.mark.parametrize("alpha, n", [("1", 0), ("t", 1), ("1/theta", 1)])
def test_polylog_hypotheses(session_q2, alpha, n):
    with pytest.raises(HypothesisError):
        solve_polylog(session_q2, alpha, n=n, n_t=2)


def test_abp_chain_for_omega(session_q2):
    omega = solve_omega(session_q2, n_t=4).omega
    phi = PhiMatrix.carlitz(session_q2.base)
    report = abp_chain_check(session_q2, omega, phi, nu_max=1)
    assert report["passed"]
    assert [step["nu"] for step in report["steps"]] == [0, 1]
    assert not report["value_zero"]


def test_abp_chain_detects_fault(session_q2):
    omega = solve_omega(session_q2, n_t=4).omega
    phi = PhiMatrix.carlitz(session_q2.base)
    report = abp_chain_check(session_q2, _with_fault(omega, 1), phi, nu_max=0)
    assert not report["passed"]
    assert report["steps"][0]["residual_valuation"] == "2"


def test_abp_chain_needs_rank_one_motive(session_q2):
    omega = solve_omega(session_q2, n_t=2).omega
    with pytest.raises(HypothesisError):
        abp_chain_check(session_q2, omega, PhiMatrix.identity(session_q2.base, 1))


@pytest.mark.slow
@pytest.mark.parametrize("fixture", ["session_q2", "session_q3"])
def test_omega_valuations_through_index_six(request, fixture):
    session = request.getfixturevalue(fixture)
    result = solve_omega(session, n_t=7)
    values = [result.omega.coefficient(0, i).valuation() for i in range(7)]
    assert values == [omega_formula(session.q, 1, 0, i) for i in range(7)]
    assert valuation_report(result)["passed"]


@pytest.mark.slow
def test_omega_grid_at_degree_two_place(session_q2_d2):
    result = solve_omega(session_q2_d2, n_t=4)
    for m in range(2):
        for i in range(4):
            assert result.omega.coefficient(m, i).valuation() == omega_formula(2, 2, m, i)


@pytest.mark.slow
@pytest.mark.parametrize("branch", ["max-val", "min-val"])
@pytest.mark.parametrize("alpha", ["1", "theta"])
@pytest.mark.parametrize("n", [1, 2])
def test_polylog_bounds_on_both_branches(session_q2, n, alpha, branch):
    result = solve_polylog(session_q2, alpha, n=n, branch=branch, n_t=7)
    report = valuation_report(result)
    assert report["passed"]
    assert report["relation"] == "lower-bound"


@pytest.mark.slow
@pytest.mark.parametrize("fixture", ["session_q3", "session_q2_d2"])
def test_abp_chain_at_other_places(request, fixture):
    session = request.getfixturevalue(fixture)
    omega = solve_omega(session).omega
    report = abp_chain_check(session, omega, PhiMatrix.carlitz(session.base), nu_max=1)
    assert report["passed"]
    assert not report["value_zero"]
