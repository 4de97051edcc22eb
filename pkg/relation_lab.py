"""
Relation search among period values and the polylogarithm motive pipeline
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Union

import galois
import numpy as np

from errors import HypothesisError, PrecisionError, ShapeMismatchError, SizeCapExceeded
from exact_scalar import ExactScalar
from field_tower import FieldElement, FieldSpec, int_to_digits
from hahn_series import INF, Cap, HahnSeries, as_cap, cap_to_str
from logger_config import audit_logger, log_exception, timed
from period_solvers import PolylogResult, solve_omega, solve_polylog
from phi_modules import FundamentalPair, PhiMatrix, verify_fundamental
from session import Session
from vadic_ring import VadicElement

logger = logging.getLogger(__name__)

Value = Union[HahnSeries, VadicElement]

COEFFICIENT_FIELDS = ('F_q', 'F_qd')


@dataclass
class RelationCertificate:
    """Outcome of a bounded-degree relation search"""
    kind: str
    degree_bound: int
    cutoff: Cap
    coefficient_field: str
    unknowns: int
    rank: int
    count: int
    coefficients: Optional[List[List[FieldElement]]] = None
    residual_valuation: Cap = INF

    def to_dict(self) -> Dict:
        data = {
            "kind": self.kind,
            "degree_bound": self.degree_bound,
            "cutoff": cap_to_str(self.cutoff),
            "coefficient_field": self.coefficient_field,
            "unknowns": self.unknowns,
            "rank": self.rank,
            "values": self.count,
        }
        if self.kind == "relation":
            data["coefficients"] = [[c.to_dict() for c in poly] for poly in self.coefficients]
            data["residual_valuation"] = cap_to_str(self.residual_valuation)
        return data


def _fp_basis(elements: Sequence[FieldElement], spec: FieldSpec) -> List[FieldElement]:
    """Greedy F_p-basis of a subfield, in the given (canonical) order"""
    GFp = galois.GF(spec.p)
    basis, rows = [], []
    for x in elements:
        if x.is_zero():
            continue
        candidate = rows + [int_to_digits(x.value, spec.p, spec.degree)]
        if np.linalg.matrix_rank(GFp(np.array(candidate))) == len(candidate):
            rows, basis = candidate, basis + [x]
    return basis


def _coefficient_basis(session: Session, coefficient_field: str) -> List[FieldElement]:
    if coefficient_field not in COEFFICIENT_FIELDS:
        raise ValueError(f"Coefficient field must be one of {COEFFICIENT_FIELDS}")
    e = 1 if coefficient_field == 'F_q' else session.d
    elements = session.tower.subfield(e)
    return _fp_basis(elements, session.spec)


def _combine(value: Value, factor: HahnSeries) -> Value:
    return value * factor if isinstance(value, HahnSeries) else value.scale(factor)


def _equations(value: Value, cutoff: Cap) -> Dict:
    """{(position..., exponent): galois int} for stored terms below cutoff"""
    if isinstance(value, HahnSeries):
        if value.cap < cutoff:
            raise PrecisionError(f"Value known only to {cap_to_str(value.cap)} < cutoff {cap_to_str(cutoff)}")
        return {(e,): c for e, c in zip(value.exps, value.coeffs) if e < cutoff}
    out = {}
    for l in range(value.d):
        for i in value.indices():
            a = value.coefficient(l, i)
            if a.cap < cutoff:
                raise PrecisionError(
                    f"Coefficient ({l},{i}) known only to {cap_to_str(a.cap)} < cutoff {cap_to_str(cutoff)}"
                )
            out.update({(l, i, e): c for e, c in zip(a.exps, a.coeffs) if e < cutoff})
    return out


def _substitute(session: Session, values: Sequence[Value], polys: List[List[FieldElement]]) -> Value:
    theta = session.theta_series(0)
    total = None
    for value, poly in zip(values, polys):
        factor = HahnSeries.zero(session.spec, budget=session.budget)
        for k, c in enumerate(poly):
            if not c.is_zero():
                factor = factor + (theta ** k).scale(c)
        term = _combine(value, factor)
        total = term if total is None else total + term
    return total


def _residual_valuation(residual: Value, cutoff: Cap) -> Cap:
    if isinstance(residual, HahnSeries):
        return residual.truncate(cutoff).valuation()
    return min(residual.coefficient(l, i).truncate(cutoff).valuation()
               for l in range(residual.d) for i in residual.indices())


@timed("kernel_search")
def kernel_search(session: Session, values: Sequence[Value], degree_bound: int, cutoff,
                  coefficient_field: str = 'F_q') -> RelationCertificate:
    """Least F_q[theta]-relation of theta-degree <= degree_bound below cutoff, or independence"""
    if not values:
        raise ShapeMismatchError("kernel_search needs at least one value")
    if len({type(v) for v in values}) != 1:
        raise ShapeMismatchError("Values must be all series or all v-adic elements")
    if degree_bound < 0:
        raise ValueError("Degree bound must be >= 0")
    cutoff = as_cap(cutoff)
    basis = _coefficient_basis(session, coefficient_field)
    spec = session.spec
    unknowns = len(values) * (degree_bound + 1) * len(basis)
    if unknowns > session.settings.kernel_cap:
        raise SizeCapExceeded(f"{unknowns} unknowns exceed kernel cap {session.settings.kernel_cap}")

    theta = session.theta_series(0)
    columns = []
    for value in values:
        for k in range(degree_bound + 1):
            for g in basis:
                columns.append(_equations(_combine(value, (theta ** k).scale(g)), cutoff))

    keys = sorted({key for col in columns for key in col})
    p, n = spec.p, spec.degree
    rows = np.zeros((len(keys) * n, unknowns), dtype=int)
    index = {key: r for r, key in enumerate(keys)}
    for j, col in enumerate(columns):
        for key, c in col.items():
            digits = int_to_digits(int(c), p, n)
            rows[index[key] * n:(index[key] + 1) * n, j] = digits
    GFp = galois.GF(p)
    if len(keys):
        A = GFp(rows)
        rank = int(np.linalg.matrix_rank(A))
        kernel = A.null_space()
    else:
        rank = 0
        kernel = GFp(np.eye(unknowns, dtype=int))

    if rank == unknowns or kernel.shape[0] == 0:
        certificate = RelationCertificate("independence", degree_bound, cutoff, coefficient_field,
                                          unknowns, rank, len(values))
        audit_logger.log_verdict("relations-search", True, f"independent at D={degree_bound}, cutoff={cutoff}")
        return certificate

    vector = [int(x) for x in kernel.row_reduce()[-1]]
    width = (degree_bound + 1) * len(basis)
    polys = []
    for j in range(len(values)):
        chunk = vector[j * width:(j + 1) * width]
        poly = []
        for k in range(degree_bound + 1):
            c = spec.zero()
            for b, g in enumerate(basis):
                c = c + g * chunk[k * len(basis) + b]
            poly.append(c)
        polys.append(poly)

    residual_val = _residual_valuation(_substitute(session, values, polys), cutoff)
    if residual_val < cutoff:
        raise PrecisionError(f"Kernel vector fails substitution at valuation {cap_to_str(residual_val)}")
    logger.info(f"Relation found: values={len(values)}, D={degree_bound}, cutoff={cap_to_str(cutoff)}")
    audit_logger.log_verdict("relations-search", True, "relation verified by substitution")
    return RelationCertificate("relation", degree_bound, cutoff, coefficient_field, unknowns, rank,
                               len(values), polys, residual_val)


@dataclass
class PolylogMotive:
    """Verified pair for (Omega^n, Omega^n L_1, ..., Omega^n L_r) with period handles"""
    pair: FundamentalPair
    n: int
    alphas: List[ExactScalar]
    omega_n: VadicElement
    polylogs: List[PolylogResult]
    _omega_inv_n: Optional[VadicElement] = field(default=None, repr=False)

    @property
    def session(self) -> Session:
        return self.pair.session

    def omega_inverse(self) -> VadicElement:
        """Omega^(-n), computed on first use"""
        if self._omega_inv_n is None:
            self._omega_inv_n = self.omega_n.inverse()
        return self._omega_inv_n

    def to_dict(self) -> Dict:
        return {
            "pair": self.pair.to_dict(),
            "n": self.n,
            "alphas": [str(a) for a in self.alphas],
            "polylogs": [result.to_dict() for result in self.polylogs],
        }


@log_exception
def build_polylog_motive(session: Session, n: int, alphas: Sequence, branch: str = None,
                         n_t: int = None, prec_u: Cap = None) -> PolylogMotive:
    """Phi lower-triangular with (t-theta)^n head; Psi from Omega^n and Omega^n L_{alpha_j,n}"""
    if branch == "enumerate":
        raise ValueError("build_polylog_motive needs a single branch policy")
    alphas = [session.scalar(a) for a in alphas]
    base = session.base
    omega = solve_omega(session, n_t, prec_u).omega
    omega_n = omega ** n
    polylogs = [solve_polylog(session, a, n, branch, n_t=n_t, prec_u=prec_u) for a in alphas]

    r = len(alphas)
    head = ExactScalar.t_minus_theta(base, n)
    zero, one = ExactScalar.from_int(base, 0), ExactScalar.from_int(base, 1)
    entries = [[zero] * (r + 1) for _ in range(r + 1)]
    entries[0][0] = head
    for j, alpha in enumerate(alphas, start=1):
        entries[j][0] = alpha.sigma() * head
        entries[j][j] = one
    phi = PhiMatrix(entries, (one, n))

    psi = [[session.zero() for _ in range(r + 1)] for _ in range(r + 1)]
    psi[0][0] = omega_n
    for j, result in enumerate(polylogs, start=1):
        psi[j][0] = omega_n * result.series
        psi[j][j] = session.one()

    check = verify_fundamental(session, phi, psi)
    if check["reason"] == "precision-shortfall":
        raise PrecisionError(f"Polylogarithm motive verified only to cap {cap_to_str(check['verified_cap'])}")
    if not check["passed"]:
        raise HypothesisError(f"Polylogarithm motive failed verification at {check['worst_entry']}")
    return PolylogMotive(check["pair"], n, alphas, omega_n, polylogs)


@dataclass
class LinearPolynomial:
    """sum_j coeffs[j] * X_j + constant over exact scalars"""
    coeffs: List[ExactScalar]
    constant: ExactScalar

    def evaluate(self, point: Sequence[ExactScalar]) -> ExactScalar:
        if len(point) != len(self.coeffs):
            raise ShapeMismatchError(f"Point has {len(point)} entries, expected {len(self.coeffs)}")
        total = self.constant
        for c, x in zip(self.coeffs, point):
            total = total + c * x
        return total

    def to_dict(self) -> Dict:
        return {"coeffs": [str(c) for c in self.coeffs], "constant": str(self.constant)}

    def __str__(self):
        terms = [f"({c})*X{j}" for j, c in enumerate(self.coeffs) if not c.is_zero()]
        if not self.constant.is_zero() or not terms:
            terms.append(f"({self.constant})")
        return " + ".join(terms)


def gamma_polys(session: Session, c: Sequence[Sequence], b: Sequence) -> List[LinearPolynomial]:
    """G_i = (b_0 - 1) F_i(X_1..X_r) - F_i(b_1..b_r)(X_0 - 1) for F_i = sum_j c_ij X_j"""
    b = [session.scalar(x) for x in b]
    c = [[session.scalar(x) for x in row] for row in c]
    r = len(b) - 1
    if any(len(row) != r for row in c):
        raise ShapeMismatchError(f"Each row of c needs {r} entries")
    one = ExactScalar.from_int(session.base, 1)
    if b[0] == one:
        raise HypothesisError("b_0 must differ from 1")
    polys = []
    for row in c:
        g = ExactScalar.from_int(session.base, 0)
        for cij, bj in zip(row, b[1:]):
            g = g + cij * bj
        coeffs = [-g] + [(b[0] - one) * cij for cij in row]
        polys.append(LinearPolynomial(coeffs, g))
    return polys


def gamma_family_point(session: Session, b: Sequence, a) -> List[ExactScalar]:
    """First column of gamma_a: (a, b_j/(b_0 - 1) * (a - 1))"""
    b = [session.scalar(x) for x in b]
    a = session.scalar(a)
    one = ExactScalar.from_int(session.base, 1)
    return [a] + [bj / (b[0] - one) * (a - one) for bj in b[1:]]


def z_polys(G: Sequence[LinearPolynomial], xi: Sequence[ExactScalar]) -> List[LinearPolynomial]:
    """H_i = G_i - X_0 * G_i(xi) / f_0, vanishing at xi"""
    f0 = xi[0]
    if f0.is_zero():
        raise HypothesisError("f_0 must be invertible")
    polys = []
    for g in G:
        f_prime = g.evaluate(xi) / f0
        polys.append(LinearPolynomial([g.coeffs[0] - f_prime] + list(g.coeffs[1:]), g.constant))
    return polys


def verify_Z_point(session: Session, H: Sequence[LinearPolynomial], motive: PolylogMotive,
                   cutoff) -> Dict:
    """Evaluate each H_i at (1, L_1, ..., L_r) with the constant term scaled by Omega^(-n)"""
    cutoff = as_cap(cutoff)
    r = len(motive.polylogs)
    rows = []
    for idx, h in enumerate(H):
        if len(h.coeffs) != r + 1:
            raise ShapeMismatchError(f"H_{idx + 1} has {len(h.coeffs)} variables, motive has {r + 1}")
        total = session.expand(h.coeffs[0])
        for c, result in zip(h.coeffs[1:], motive.polylogs):
            if not c.is_zero():
                total = total + session.expand(c) * result.series
        if not h.constant.is_zero():
            total = total + session.expand(h.constant) * motive.omega_inverse()
        for l in range(total.d):
            for i in range(max(total.i_min, 0), total.n_t):
                a = total.coefficient(l, i)
                if a.cap < cutoff:
                    raise PrecisionError(
                        f"H_{idx + 1} residual at ({l},{i}) known only to {cap_to_str(a.cap)}"
                    )
        val = min(total.coefficient(l, i).truncate(cutoff).valuation()
                  for l in range(total.d) for i in range(max(total.i_min, 0), total.n_t))
        rows.append({"i": idx + 1, "residual_valuation": cap_to_str(val), "passed": val >= cutoff})
    passed = all(row["passed"] for row in rows)
    audit_logger.log_verdict("verify-z-point", passed)
    return {"passed": passed, "cutoff": cap_to_str(cutoff), "rows": rows}


def dim_bounds_report(r: int, relations: Sequence[RelationCertificate] = (),
                      independence: RelationCertificate = None, tdeg_proxy: int = None) -> Dict:
    """Bracket for dim_E N from verified relations and a bounded-degree independence certificate"""
    verified = [cert for cert in relations
                if cert.kind == "relation" and cert.residual_valuation >= cert.cutoff]
    s = len(verified)
    upper = r + 2 - s
    lower = independence.count if independence is not None and independence.kind == "independence" else 1
    lower = min(lower, upper)
    if r == 0 and tdeg_proxy is None:
        tdeg_proxy = 1
    report = {
        "r": r,
        "relations": s,
        "upper_bound": upper,
        "lower_bound": lower,
        "tdeg_bracket": {"min": max(lower - 1, 0), "max": upper},
        "conditional": lower != upper,
    }
    if tdeg_proxy is not None:
        report["tdeg_proxy"] = tdeg_proxy
        report["dim_bracket"] = {"min": tdeg_proxy, "max": tdeg_proxy + 1}
    if independence is not None and independence.kind == "independence" and independence.count >= r + 1:
        report["corollary"] = (
            f"Omega, L_1..L_{r} algebraically independent over E, conditional on bounded-degree "
            f"independence at (D={independence.degree_bound}, cutoff={cap_to_str(independence.cutoff)})"
        )
    if report["conditional"]:
        report["caveat"] = "lower bound is certified only for bounded-degree relations"
    return report
