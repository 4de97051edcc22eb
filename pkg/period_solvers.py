"""
Carlitz periods and polylogarithms at a finite place

Both reduce, coefficient by coefficient, to cyclic systems
    X_l = C_l * X_{l-1}^q + B_l    (l in Z/d)
which collapse to one Artin-Schreier equation at the reference component.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Union

from errors import HypothesisError, PrecisionError
from exact_scalar import ExactScalar
from field_tower import binomial_mod
from hahn_series import INF, Cap, HahnSeries, cap_to_str
from logger_config import audit_logger, solver_logger, timed
from phi_modules import FundamentalPair, PhiMatrix, verify_fundamental
from root_solvers import artin_schreier_kernel, solve_artin_schreier
from session import Session
from vadic_ring import VadicElement, eval_theta_power

logger = logging.getLogger(__name__)

Branch = Union[str, int]


@dataclass
class OmegaResult:
    """Omega_v with its per-index branch record"""
    omega: VadicElement
    branches: Dict[int, Branch]
    session: Session

    def to_dict(self) -> Dict:
        return {
            "kind": "omega",
            "series": self.omega.to_dict(),
            "branches": {str(i): b for i, b in self.branches.items()},
        }


@dataclass
class PolylogResult:
    """L_{alpha,n} with its per-index branch record"""
    series: VadicElement
    alpha: ExactScalar
    n: int
    branches: Dict[int, Branch]
    session: Session

    def to_dict(self) -> Dict:
        return {
            "kind": "polylog",
            "alpha": str(self.alpha),
            "n": self.n,
            "series": self.series.to_dict(),
            "branches": {str(i): b for i, b in self.branches.items()},
        }


def _lambda_minus_theta(session: Session) -> List[HahnSeries]:
    """c_l = lambda_l - theta at theta = lambda_0 + u"""
    lam0 = session.place.reference
    u = HahnSeries.monomial(session.spec.one(), 1, budget=session.budget)
    return [HahnSeries.constant(lam - lam0, session.budget) - u for lam in session.place.lambdas]


def _solve_cyclic(session: Session, C: List[HahnSeries], B: List[HahnSeries], target: Cap,
                  branch: Branch, solver: str) -> List[HahnSeries]:
    """Solve X_l = C_l X_{l-1}^q + B_l through the reference component"""
    d = session.d
    one = HahnSeries.one(session.spec, session.budget)
    gammas, betas = [one], [HahnSeries.zero(session.spec, budget=session.budget)]
    for l in range(1, d):
        gammas.append(C[l] * gammas[-1].q_power(1))
        betas.append(C[l] * betas[-1].q_power(1) + B[l])
    gamma_d = C[0] * gammas[-1].q_power(1)
    beta_d = C[0] * betas[-1].q_power(1) + B[0]
    x0 = solve_artin_schreier(gamma_d, beta_d, d, session.tower, target, branch, solver)
    return [x0] + [gammas[l] * x0.q_power(l) + betas[l] for l in range(1, d)]


def _omega_leading(session: Session, C: List[HahnSeries], target: Cap, branch: Branch) -> List[HahnSeries]:
    """Nonzero solution of the homogeneous cyclic system (index 0 of Omega)"""
    d = session.d
    gammas = [HahnSeries.one(session.spec, session.budget)]
    for l in range(1, d):
        gammas.append(C[l] * gammas[-1].q_power(1))
    gamma_d = C[0] * gammas[-1].q_power(1)
    z = artin_schreier_kernel(gamma_d, d, session.tower, target)
    if isinstance(branch, int):
        units = [zeta for zeta in session.tower.subfield(d) if not zeta.is_zero()]
        if not 0 <= branch < len(units):
            raise ValueError(f"Branch index {branch} outside 0..{len(units) - 1}")
        z = z.scale(units[branch])
    solver_logger.log_branch("omega", branch if isinstance(branch, int) else 0, "radical", z.valuation())
    return [z] + [gammas[l] * z.q_power(l) for l in range(1, d)]


@timed("solve_omega")
def solve_omega(session: Session, n_t: int = None, prec_u: Cap = None, branch: Branch = None,
                overrides: Dict[int, int] = None) -> OmegaResult:
    """Coefficients a_{l,i} of Omega_v with sigma(Omega) = (t - theta) Omega"""
    n_t = n_t or session.n_t
    target = Fraction(prec_u) if prec_u is not None else session.prec_u
    policy = branch or session.settings.branch
    if policy == "enumerate":
        policy = "max-val"
    overrides = overrides or {}
    d = session.d
    work = target + 2
    C = [c.inv(work) for c in _lambda_minus_theta(session)]

    coeffs: List[List[HahnSeries]] = [[] for _ in range(d)]
    record: Dict[int, Branch] = {}
    for i in range(n_t):
        choice = overrides.get(i, policy)
        if i == 0:
            xs = _omega_leading(session, C, target, overrides.get(0, "radical"))
            record[0] = overrides.get(0, "radical")
        else:
            B = [-(C[l] * coeffs[l][i - 1]) for l in range(d)]
            xs = _solve_cyclic(session, C, B, target, choice, "omega")
            record[i] = choice
        for l in range(d):
            coeffs[l].append(xs[l])

    tails = [(Fraction(0), Fraction(0))] * d
    omega = VadicElement(session.place, coeffs, 0, n_t, tails)
    logger.info(f"Omega computed: q={session.q}, d={d}, n_t={n_t}, cap={cap_to_str(omega.min_cap())}")
    return OmegaResult(omega, record, session)


def _alpha_q(session: Session, alpha: ExactScalar, work: Cap) -> HahnSeries:
    lam0 = session.place.reference
    coeffs, _ = alpha.expand_at(lam0, lam0, 1, work, session.budget)
    return coeffs[0].q_power(1)


@timed("solve_polylog")
def solve_polylog(session: Session, alpha, n: int = 1, branch: Branch = None,
                  overrides: Dict[int, int] = None, n_t: int = None,
                  prec_u: Cap = None) -> Union[PolylogResult, List[PolylogResult]]:
    """L_{alpha,n} with sigma(L) = sigma(alpha) + L/(t - theta)^n; 'enumerate' returns every index-0 branch"""
    alpha = session.scalar(alpha)
    policy = branch or session.settings.branch
    if policy == "enumerate":
        count = session.q ** session.d
        return [solve_polylog(session, alpha, n, "max-val", {**(overrides or {}), 0: k}, n_t, prec_u)
                for k in range(count)]
    if n < 1:
        raise HypothesisError("Polylogarithm weight n must be >= 1")
    if not alpha.is_t_free():
        raise HypothesisError("alpha must lie in K = F_q(theta)")
    if alpha.theta_valuation(session.place.reference) < 0:
        raise HypothesisError("alpha must have non-negative valuation at the place")
    n_t = n_t or session.n_t
    target = Fraction(prec_u) if prec_u is not None else session.prec_u
    overrides = overrides or {}
    d, q, p = session.d, session.q, session.tower.p

    tails = [(Fraction(-q**m, q**d), Fraction(-q**m * n, q**d - 1)) for m in range(d)]
    if alpha.is_zero() and not any(overrides.values()):
        zero = VadicElement.zero(session.place, session.spec, n_t, session.budget)
        return PolylogResult(zero, alpha, n, {i: "zero" for i in range(n_t)}, session)

    c = _lambda_minus_theta(session)
    c_pow = [[c[l] ** k for k in range(n + 1)] for l in range(d)]
    C = [c_pow[l][n] for l in range(d)]
    alpha_q = _alpha_q(session, alpha, target + 2)
    binom = [binomial_mod(n, j, p) for j in range(n + 1)]

    coeffs: List[List[HahnSeries]] = [[] for _ in range(d)]
    record: Dict[int, Branch] = {}
    for i in range(n_t):
        B = []
        for l in range(d):
            acc = HahnSeries.zero(session.spec, budget=session.budget)
            for j in range(1, min(n, i) + 1):
                if binom[j]:
                    acc = acc + (c_pow[l][n - j] * coeffs[(l - 1) % d][i - j].q_power(1)).scale(binom[j])
            if i <= n and binom[i]:
                acc = acc - (c_pow[l][n - i] * alpha_q).scale(binom[i])
            B.append(acc)
        choice = overrides.get(i, policy)
        xs = _solve_cyclic(session, C, B, target, choice, "polylog")
        record[i] = choice
        for l in range(d):
            coeffs[l].append(xs[l])

    series = VadicElement(session.place, coeffs, 0, n_t, tails)
    logger.info(f"Polylog computed: alpha={alpha}, n={n}, branch={policy}, cap={cap_to_str(series.min_cap())}")
    return PolylogResult(series, alpha, n, record, session)


def omega_formula(q: int, d: int, m: int, i: int) -> Fraction:
    """Exact valuation q^m / (q^(i*d) * (q^d - 1))"""
    return Fraction(q**m, q**(i * d) * (q**d - 1))


def polylog_bound(q: int, d: int, n: int, m: int, i: int) -> Fraction:
    """Lower bound -q^m (i/q^d + n/(q^d - 1))"""
    return -q**m * (Fraction(i, q**d) + Fraction(n, q**d - 1))


def valuation_report(result: Union[OmegaResult, PolylogResult]) -> Dict:
    """Check every stored valuation against the closed formula (Omega) or bound (polylog)"""
    session = result.session
    q, d = session.q, session.d
    is_omega = isinstance(result, OmegaResult)
    series = result.omega if is_omega else result.series
    rows, first_failure = [], None
    for m in range(d):
        for i in series.indices():
            coeff = series.coefficient(m, i)
            known = not coeff.is_zero()
            val = coeff.valuation()
            if is_omega:
                formula = omega_formula(q, d, m, i)
                if known:
                    verdict = "pass" if val == formula else "fail"
                else:
                    verdict = "unknown"
            else:
                formula = polylog_bound(q, d, result.n, m, i)
                verdict = "pass" if val >= formula else ("fail" if known else "unknown")
            row = {"m": m, "i": i, "val": cap_to_str(val) if known else None,
                   "cap": cap_to_str(coeff.cap), "formula": str(formula), "verdict": verdict}
            rows.append(row)
            if verdict != "pass" and first_failure is None:
                first_failure = row
    passed = first_failure is None
    audit_logger.log_verdict("valuations", passed, None if passed else f"first counterexample {first_failure}")
    return {
        "kind": "omega" if is_omega else "polylog",
        "relation": "equality" if is_omega else "lower-bound",
        "rows": rows,
        "passed": passed,
        "first_failure": first_failure,
    }


def _chain_factor(session: Session, c: ExactScalar, s: int, nu: int) -> HahnSeries:
    """prod_{j<d} c^(q^j) (theta^(q^(d(nu+1))) - theta^(q^j))^s as a series"""
    d = session.d
    lam0 = session.place.reference
    c_series = c.expand_at(lam0, lam0, 1, session.prec_u + 2, session.budget)[0][0]
    top = session.theta_series(d * (nu + 1))
    factor = HahnSeries.one(session.spec, session.budget)
    for j in range(d):
        diff = top - session.theta_series(j)
        term = diff ** s if s >= 0 else diff.inv(session.prec_u + 2) ** (-s)
        factor = factor * c_series.q_power(j) * term
    return factor


def abp_chain_check(session: Session, psi: VadicElement, phi: PhiMatrix, nu_max: int = None) -> Dict:
    """psi(theta^(q^(d nu)))^(q^d) = factor * psi(theta^(q^(d(nu+1)))) for nu <= nu_max"""
    if phi.r != 1 or phi.motive is None:
        raise HypothesisError("Chain check needs a rank-1 Phi with c*(t - theta)^s data")
    c, s = phi.motive
    nu_max = session.settings.nu_max if nu_max is None else nu_max
    d = session.d
    window = session.settings.window
    steps = []
    evaluations = {0: eval_theta_power(psi, 0, window, strict=False)}
    for nu in range(nu_max + 1):
        evaluations[nu + 1] = eval_theta_power(psi, nu + 1, window, strict=False)
        lhs = evaluations[nu].value.q_power(d)
        rhs = _chain_factor(session, c, s, nu) * evaluations[nu + 1].value
        overlap = min(lhs.cap, rhs.cap)
        if overlap != INF and lhs.is_zero() and rhs.is_zero() and not psi_is_zero(psi):
            raise PrecisionError(f"No overlapping precision between the two sides at nu = {nu}")
        residual = (lhs - rhs).truncate(overlap)
        steps.append({
            "nu": nu,
            "passed": residual.is_zero(),
            "overlap_cap": cap_to_str(overlap),
            "residual_valuation": cap_to_str(residual.valuation()) if not residual.is_zero() else None,
            "lhs": lhs.to_dict(),
            "rhs": rhs.to_dict(),
        })

    value_zero = evaluations[0].value.is_zero()
    identically_zero = psi_is_zero(psi)
    consistent = identically_zero or not value_zero
    passed = all(step["passed"] for step in steps) and consistent
    audit_logger.log_verdict("abp-check", passed)
    return {
        "passed": passed,
        "steps": steps,
        "value_at_theta": evaluations[0].to_dict(),
        "value_zero": value_zero,
        "identically_zero": identically_zero,
    }


def psi_is_zero(psi: VadicElement) -> bool:
    """All stored coefficients vanish below their caps"""
    return all(a.is_zero() for row in psi.components for a in row)


def polylog_residual(result: PolylogResult) -> Dict:
    """(t - theta)^n sigma(L) - (t - theta)^n sigma(alpha) - L, coefficientwise"""
    session = result.session
    factor = session.expand(session.t_minus_theta(result.n))
    alpha_sigma = session.expand(result.alpha.sigma())
    L = result.series
    residual = factor * L.sigma() - factor * alpha_sigma - L
    return _summarize(residual)


def branch_difference_check(first: PolylogResult, second: PolylogResult) -> Dict:
    """Delta = L' - L solves the homogeneous equation (t - theta)^n sigma(Delta) = Delta"""
    session = first.session
    factor = session.expand(session.t_minus_theta(first.n))
    delta = second.series - first.series
    return _summarize(factor * delta.sigma() - delta)


def _summarize(residual: VadicElement) -> Dict:
    worst, worst_val, cap = None, INF, INF
    for l in range(residual.d):
        for i in residual.indices():
            a = residual.coefficient(l, i)
            cap = min(cap, a.cap)
            if not a.is_zero() and a.valuation() < worst_val:
                worst, worst_val = {"l": l, "i": i}, a.valuation()
    return {"passed": worst is None, "verified_cap": cap, "min_residual_valuation": worst_val,
            "worst_entry": worst}


def carlitz_motive(session: Session, n_t: int = None, prec_u: Cap = None) -> Dict:
    """Phi = (t - theta), Psi = Omega_v, verified; plus the valuation denominators of a_{0,i}"""
    result = solve_omega(session, n_t, prec_u)
    phi = PhiMatrix.carlitz(session.base)
    check = verify_fundamental(session, phi, [[result.omega]])
    denominators = []
    for i in result.omega.indices():
        coeff = result.omega.coefficient(0, i)
        if coeff.is_zero():
            break
        denominators.append(Fraction(coeff.valuation()).denominator)
    return {"pair": check["pair"], "verification": check, "omega": result, "denominators": denominators}
