"""
Root solvers over truncated Hahn series

solve_radical: x^m = c with p not dividing m.
solve_artin_schreier: gamma*x^Q - x + beta = 0 with Q = q^e.
"""
import logging
from fractions import Fraction
from typing import List, Union

from app_config import config
from errors import NonUnitError, PrecisionError
from field_tower import FieldTower, common_spec, qth_root
from hahn_series import INF, Cap, HahnSeries, as_cap, newton_polygon
from logger_config import solver_logger

logger = logging.getLogger(__name__)

Branch = Union[str, int]


def solve_radical(c: HahnSeries, m: int, tower: FieldTower, prec: Cap = INF) -> HahnSeries:
    """Least-branch m-th root of c, to absolute precision prec"""
    p = tower.p
    if m < 1 or m % p == 0:
        raise ValueError(f"Radical degree {m} must be positive and prime to p = {p}")
    prec = as_cap(prec)
    if m == 1:
        return c.truncate(prec)
    e0, c0 = c.leading()
    w = e0 / m
    x0 = tower.nth_root(c0, m)
    if len(c) == 1 and c.cap == INF and prec == INF:
        return HahnSeries.monomial(x0, w, budget=c.budget)
    rel = min(prec - w, c.cap - e0)
    if rel == INF:
        raise PrecisionError("Radical of an exact series needs a target precision")

    one = HahnSeries.one(c.spec, c.budget)
    unit = c.scale(c0.inverse()).shift(-e0).truncate(rel)
    m_inv = pow(m, -1, p)
    z = one.truncate(rel)
    for _ in range(64):
        err = one - unit * z**m
        if err.is_zero():
            break
        z = z + (z * err).scale(m_inv)
    else:
        raise PrecisionError("Radical iteration did not converge")
    root = (unit * z ** (m - 1)).scale(x0).shift(w)
    return root.truncate(min(prec, w + rel))


def _error_bound(remainder_cap: Cap, k: Fraction, vg: Fraction, Q: int) -> Cap:
    """Valuation bound on a root driven by an unknown term of valuation >= remainder_cap"""
    if remainder_cap == INF or remainder_cap >= k:
        return remainder_cap
    return (remainder_cap - vg) / Q


def _principal_root(gamma: HahnSeries, beta: HahnSeries, e: int, tower: FieldTower,
                    target: Cap, solver: str) -> HahnSeries:
    """Greedy term-by-term root; least residue root at each tie"""
    Q = tower.q ** e
    budget = beta.budget
    vg, lg = gamma.leading()
    k = -vg / (Q - 1)
    limit = budget.max_terms or config.DEFAULT_MAX_TERMS
    spec = common_spec(gamma.spec, beta.spec)

    terms = []
    B = beta
    while True:
        if B.is_zero():
            cap = min(target, _error_bound(B.cap, k, vg, Q))
            break
        vB, lB = B.leading()
        w = max(val for val, _ in newton_polygon([(0, vB), (1, 0), (Q, vg)]).root_valuations())
        if w >= target:
            cap = min(target, _error_bound(B.cap, k, vg, Q))
            break
        if len(terms) >= limit or not budget.admits(w):
            cap = w
            solver_logger.log_precision_reduced(
                solver, target, w,
                "term budget" if len(terms) >= limit else f"denominator of {w}",
            )
            break
        if vB > k:
            c = lB
        elif vB == k:
            c = tower.additive_roots(e, lg, lB)[0]
        else:
            c = qth_root(tower.lift(-lB / lg), e)
        term = HahnSeries.monomial(c, w, budget=budget)
        terms.append((w, c))
        B = B + gamma * term.q_power(e) - term

    return HahnSeries.from_terms(terms, cap, budget, spec=spec)


def artin_schreier_kernel(gamma: HahnSeries, e: int, tower: FieldTower, target: Cap) -> HahnSeries:
    """Nonzero z with gamma*z^Q = z; all others are zeta*z, zeta in F_Q"""
    Q = tower.q ** e
    vg, _ = gamma.leading()
    k = -vg / (Q - 1)
    target = as_cap(target)
    if target <= k:
        return HahnSeries.zero(gamma.spec, target, gamma.budget)
    inverse = gamma.inv(-vg + (target - k))
    return solve_radical(inverse, Q - 1, tower, target)


def enumerate_artin_schreier(gamma: HahnSeries, beta: HahnSeries, e: int, tower: FieldTower,
                             target: Cap) -> List[HahnSeries]:
    """All Q roots, principal root first, then by increasing zeta"""
    target = as_cap(target)
    root = _principal_root(gamma, beta, e, tower, target, "artin-schreier")
    z = artin_schreier_kernel(gamma, e, tower, target)
    return [root + z.scale(zeta) for zeta in tower.subfield(e)]


def solve_artin_schreier(gamma: HahnSeries, beta: HahnSeries, e: int, tower: FieldTower,
                         target: Cap, branch: Branch = "max-val",
                         solver: str = "artin-schreier") -> HahnSeries:
    """One root of gamma*x^(q^e) - x + beta = 0 chosen by branch"""
    if gamma.is_zero():
        raise NonUnitError("Artin-Schreier equation needs a known nonzero gamma")
    target = as_cap(target)
    if isinstance(branch, int):
        roots = enumerate_artin_schreier(gamma, beta, e, tower, target)
        if not 0 <= branch < len(roots):
            raise ValueError(f"Branch index {branch} outside 0..{len(roots) - 1}")
        result = roots[branch]
    elif branch == "max-val":
        result = _principal_root(gamma, beta, e, tower, target, solver)
    elif branch == "min-val":
        root = _principal_root(gamma, beta, e, tower, target, solver)
        z = artin_schreier_kernel(gamma, e, tower, target)
        result = root + z if z.valuation() < root.valuation() else root
    else:
        raise ValueError(f"Unknown branch policy {branch!r}")
    solver_logger.log_branch(solver, branch if isinstance(branch, int) else 0,
                             branch if isinstance(branch, str) else "index", result.valuation())
    return result
