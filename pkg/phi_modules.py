"""
Phi-modules: exact matrices Phi, period matrices Psi and the equation sigma(Psi) = Phi*Psi
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from errors import (HypothesisError, NonUnitError, NotSigmaFixedError, PrecisionError,
                    ShapeMismatchError, SingularMatrixError)
from exact_scalar import ExactScalar, parse_scalar
from field_tower import FieldSpec
from hahn_series import INF, Cap, cap_to_str
from logger_config import audit_logger, log_exception
from session import Session
from vadic_ring import VadicElement, is_sigma_fixed

logger = logging.getLogger(__name__)

Matrix = List[List[VadicElement]]


class PhiMatrix:
    """Square matrix over E given by exact scalars"""

    def __init__(self, entries: Sequence[Sequence[ExactScalar]], motive: Tuple[ExactScalar, int] = None):
        entries = [list(row) for row in entries]
        r = len(entries)
        if r == 0 or any(len(row) != r for row in entries):
            raise ShapeMismatchError("Phi must be a nonempty square matrix")
        self.entries = entries
        self.motive = motive
        if motive is not None and not self.check_motive():
            raise HypothesisError("det Phi differs from c*(t - theta)^s")

    @property
    def r(self) -> int:
        return len(self.entries)

    @property
    def base(self) -> FieldSpec:
        return self.entries[0][0].base

    def __getitem__(self, index):
        i, j = index
        return self.entries[i][j]

    # Constructors

    @classmethod
    def identity(cls, base: FieldSpec, r: int) -> "PhiMatrix":
        return cls([[ExactScalar.from_int(base, int(i == j)) for j in range(r)] for i in range(r)])

    @classmethod
    def scalar(cls, x: ExactScalar, motive: Tuple[ExactScalar, int] = None) -> "PhiMatrix":
        return cls([[x]], motive)

    @classmethod
    def carlitz(cls, base: FieldSpec, n: int = 1) -> "PhiMatrix":
        """(t - theta)^n with the t-motive data c = 1, s = n"""
        return cls([[ExactScalar.t_minus_theta(base, n)]], (ExactScalar.from_int(base, 1), n))

    # Exact linear algebra

    def _gauss_jordan(self, augment: bool):
        """Row reduce [Phi | I]; returns (det, inverse rows or None)"""
        r = self.r
        base = self.base
        rows = [list(row) + ([ExactScalar.from_int(base, int(i == j)) for j in range(r)] if augment else [])
                for i, row in enumerate(self.entries)]
        det = ExactScalar.from_int(base, 1)
        for col in range(r):
            pivot = next((k for k in range(col, r) if not rows[k][col].is_zero()), None)
            if pivot is None:
                return ExactScalar.from_int(base, 0), None
            if pivot != col:
                rows[col], rows[pivot] = rows[pivot], rows[col]
                det = -det
            lead = rows[col][col]
            det = det * lead
            inv = lead.inverse()
            rows[col] = [x * inv for x in rows[col]]
            for k in range(r):
                if k != col and not rows[k][col].is_zero():
                    factor = rows[k][col]
                    rows[k] = [x - factor * y for x, y in zip(rows[k], rows[col])]
        return det, [row[r:] for row in rows] if augment else None

    def det(self) -> ExactScalar:
        if self.r == 1:
            return self.entries[0][0]
        return self._gauss_jordan(augment=False)[0]

    def inverse(self) -> "PhiMatrix":
        det, inv = self._gauss_jordan(augment=True)
        if inv is None or det.is_zero():
            raise SingularMatrixError("Phi is not invertible over E")
        return PhiMatrix(inv)

    def check_motive(self) -> bool:
        c, s = self.motive
        return self.det() == c * ExactScalar.t_minus_theta(self.base, s)

    def sigma(self) -> "PhiMatrix":
        return PhiMatrix([[x.sigma() for x in row] for row in self.entries])

    def transpose(self) -> "PhiMatrix":
        return PhiMatrix([list(col) for col in zip(*self.entries)])

    def __matmul__(self, other: "PhiMatrix") -> "PhiMatrix":
        if other.r != self.r:
            raise ShapeMismatchError("Phi shapes differ")
        return PhiMatrix([
            [sum((self.entries[i][k] * other.entries[k][j] for k in range(1, self.r)),
                 self.entries[i][0] * other.entries[0][j]) for j in range(self.r)]
            for i in range(self.r)
        ])

    def __eq__(self, other):
        if not isinstance(other, PhiMatrix) or other.r != self.r:
            return False
        return all(a == b for ra, rb in zip(self.entries, other.entries) for a, b in zip(ra, rb))

    __hash__ = None

    def block_diag(self, other: "PhiMatrix") -> "PhiMatrix":
        zero = ExactScalar.from_int(self.base, 0)
        r, s = self.r, other.r
        rows = [row + [zero] * s for row in self.entries]
        rows += [[zero] * r + row for row in other.entries]
        return PhiMatrix(rows)

    def kron(self, other: "PhiMatrix") -> "PhiMatrix":
        r, s = self.r, other.r
        return PhiMatrix([
            [self.entries[i // s][j // s] * other.entries[i % s][j % s] for j in range(r * s)]
            for i in range(r * s)
        ])

    def expand(self, session: Session) -> Matrix:
        return [[session.expand(x) for x in row] for row in self.entries]

    # Serialization

    def to_dict(self) -> Dict:
        data = {"phi": [[str(x) for x in row] for row in self.entries]}
        if self.motive is not None:
            data["motive"] = {"c": str(self.motive[0]), "s": self.motive[1]}
        return data

    @classmethod
    def from_dict(cls, data, base: FieldSpec) -> "PhiMatrix":
        rows = data["phi"] if isinstance(data, dict) else data
        entries = [[parse_scalar(x, base) for x in row] for row in rows]
        motive = None
        if isinstance(data, dict) and data.get("motive"):
            motive = (parse_scalar(data["motive"]["c"], base), int(data["motive"]["s"]))
        return cls(entries, motive)


# Matrices of v-adic elements

def mat_shape(A: Matrix) -> Tuple[int, int]:
    return len(A), len(A[0]) if A else 0


def mat_mul(A: Matrix, B: Matrix) -> Matrix:
    if mat_shape(A)[1] != mat_shape(B)[0]:
        raise ShapeMismatchError(f"Cannot multiply {mat_shape(A)} by {mat_shape(B)}")
    out = []
    for row in A:
        out_row = []
        for j in range(len(B[0])):
            acc = row[0] * B[0][j]
            for k in range(1, len(B)):
                acc = acc + row[k] * B[k][j]
            out_row.append(acc)
        out.append(out_row)
    return out


def mat_sub(A: Matrix, B: Matrix) -> Matrix:
    if mat_shape(A) != mat_shape(B):
        raise ShapeMismatchError(f"Shapes {mat_shape(A)} and {mat_shape(B)} differ")
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_add(A: Matrix, B: Matrix) -> Matrix:
    if mat_shape(A) != mat_shape(B):
        raise ShapeMismatchError(f"Shapes {mat_shape(A)} and {mat_shape(B)} differ")
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_identity(session: Session, r: int) -> Matrix:
    return [[session.one() if a == b else session.zero() for b in range(r)] for a in range(r)]


def mat_sigma(A: Matrix) -> Matrix:
    return [[x.sigma() for x in row] for row in A]


def mat_transpose(A: Matrix) -> Matrix:
    return [list(col) for col in zip(*A)]


def mat_det(A: Matrix) -> VadicElement:
    """Laplace expansion along the first row"""
    r = len(A)
    if r == 1:
        return A[0][0]
    total = None
    for j in range(r):
        minor = [row[:j] + row[j + 1:] for row in A[1:]]
        term = A[0][j] * mat_det(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total


def mat_inverse(A: Matrix) -> Matrix:
    """Adjugate over the inverted determinant"""
    r = len(A)
    det = mat_det(A)
    try:
        det_inv = det.inverse()
    except NonUnitError as e:
        raise SingularMatrixError(f"Psi is not invertible at this precision: {e}")
    if r == 1:
        return [[det_inv]]
    out = []
    for i in range(r):
        row = []
        for j in range(r):
            minor = [rr[:i] + rr[i + 1:] for k, rr in enumerate(A) if k != j]
            cof = mat_det(minor)
            if (i + j) % 2:
                cof = -cof
            row.append(cof * det_inv)
        out.append(row)
    return out


def mat_block_diag(A: Matrix, B: Matrix, session: Session) -> Matrix:
    zero = session.zero()
    return [row + [zero] * len(B) for row in A] + [[zero] * len(A) + row for row in B]


def mat_kron(A: Matrix, B: Matrix) -> Matrix:
    r, s = len(A), len(B)
    return [[A[i // s][j // s] * B[i % s][j % s] for j in range(r * s)] for i in range(r * s)]


def _residual_summary(R: Matrix) -> Dict:
    """Cap floor, least stored valuation and its location"""
    verified_cap: Cap = INF
    worst_val: Cap = INF
    worst = None
    for a, row in enumerate(R):
        for b, x in enumerate(row):
            for l in range(x.d):
                for i in x.indices():
                    coeff = x.coefficient(l, i)
                    verified_cap = min(verified_cap, coeff.cap)
                    if not coeff.is_zero() and coeff.valuation() < worst_val:
                        worst_val = coeff.valuation()
                        worst = {"row": a, "col": b, "l": l, "i": i}
    return {"verified_cap": verified_cap, "min_residual_valuation": worst_val, "worst_entry": worst}


def _det_is_unit(psi: Matrix) -> bool:
    det = mat_det(psi)
    return all(any(not det.coefficient(l, i).is_zero() for i in det.indices()) for l in range(det.d))


@dataclass
class FundamentalPair:
    """Phi with a period matrix Psi verified to verified_cap"""
    phi: PhiMatrix
    psi: Matrix
    verified_cap: Cap
    session: Session

    @property
    def r(self) -> int:
        return self.phi.r

    def to_dict(self) -> Dict:
        data = self.phi.to_dict()
        data.update({
            "field": self.session.spec.to_dict(),
            "place": self.session.place.to_dict(),
            "psi": [[x.to_dict() for x in row] for row in self.psi],
            "verified_cap": cap_to_str(self.verified_cap),
        })
        return data


def _shortfall(verified_cap: Cap, min_cap: Optional[Cap]) -> Optional[str]:
    """Why a clean residual still vouches for too little, or None"""
    if verified_cap <= 0:
        return f"residual known only to cap {cap_to_str(verified_cap)} <= 0"
    if min_cap is not None and verified_cap < min_cap:
        return f"residual known only to cap {cap_to_str(verified_cap)} < min-cap {cap_to_str(min_cap)}"
    return None


@log_exception
def verify_fundamental(session: Session, phi: PhiMatrix, psi: Matrix, min_cap: Cap = None) -> Dict:
    """Check sigma(Psi) = Phi*Psi coefficientwise; a pass needs a positive cap of at least min_cap"""
    if mat_shape(psi) != (phi.r, phi.r):
        raise ShapeMismatchError(f"Psi has shape {mat_shape(psi)}, Phi has rank {phi.r}")
    if not _det_is_unit(psi):
        raise SingularMatrixError("det Psi has no known nonzero coefficient")
    residual = mat_sub(mat_sigma(psi), mat_mul(phi.expand(session), psi))
    summary = _residual_summary(residual)
    if summary["worst_entry"] is not None:
        reason = "residual"
    else:
        shortfall = _shortfall(summary["verified_cap"], min_cap)
        reason = "precision-shortfall" if shortfall else None
        if shortfall:
            logger.warning(f"verify_fundamental: {shortfall}")
    passed = reason is None
    result = {
        "passed": passed,
        "reason": reason,
        "min_cap": cap_to_str(min_cap) if min_cap is not None else None,
        "pair": FundamentalPair(phi, psi, summary["verified_cap"], session) if passed else None,
        **summary,
    }
    audit_logger.log_verdict("verify-fundamental", passed,
                             f"cap {cap_to_str(summary['verified_cap'])}" + (f", {reason}" if reason else ""))
    return result


def _require(result: Dict, what: str) -> "FundamentalPair":
    if result["reason"] == "precision-shortfall":
        raise PrecisionError(f"{what} verified only to cap {cap_to_str(result['verified_cap'])}")
    if not result["passed"]:
        raise HypothesisError(f"{what} failed verification at {result['worst_entry']}")
    return result["pair"]


def direct_sum(A: FundamentalPair, B: FundamentalPair, verify: bool = True) -> FundamentalPair:
    """Block-diagonal Phi and Psi"""
    phi = A.phi.block_diag(B.phi)
    psi = mat_block_diag(A.psi, B.psi, A.session)
    if verify:
        return _require(verify_fundamental(A.session, phi, psi), "direct sum")
    return FundamentalPair(phi, psi, min(A.verified_cap, B.verified_cap), A.session)


def kronecker(A: FundamentalPair, B: FundamentalPair, verify: bool = True) -> FundamentalPair:
    phi = A.phi.kron(B.phi)
    psi = mat_kron(A.psi, B.psi)
    if verify:
        return _require(verify_fundamental(A.session, phi, psi), "Kronecker product")
    return FundamentalPair(phi, psi, min(A.verified_cap, B.verified_cap), A.session)


def dual(A: FundamentalPair, verify: bool = True) -> FundamentalPair:
    """Transpose-inverse of Phi and Psi"""
    phi = A.phi.inverse().transpose()
    psi = mat_transpose(mat_inverse(A.psi))
    if verify:
        return _require(verify_fundamental(A.session, phi, psi), "dual")
    return FundamentalPair(phi, psi, A.verified_cap, A.session)


def base_change(A: FundamentalPair, M: PhiMatrix) -> FundamentalPair:
    """Phi' = sigma(M) Phi M^-1, Psi' = M Psi"""
    phi = M.sigma() @ A.phi @ M.inverse()
    psi = mat_mul(M.expand(A.session), A.psi)
    return _require(verify_fundamental(A.session, phi, psi), "base change")


def ambiguity(A: FundamentalPair, psi_other: Matrix) -> Dict:
    """delta = Psi^-1 Psi' and whether it is sigma-fixed entrywise

    delta is formed as 1 + Psi^-1 (Psi' - Psi). status is 'sigma-fixed',
    'not-sigma-fixed' or 'undetermined' (only unknown constant terms remain).
    """
    result = verify_fundamental(A.session, A.phi, psi_other)
    if result["reason"] == "residual":
        raise HypothesisError("Second period matrix is not fundamental for Phi")
    if result["reason"] == "precision-shortfall":
        raise PrecisionError("Second period matrix verified only to a non-positive cap")
    difference = mat_sub(psi_other, A.psi)
    delta = mat_add(mat_identity(A.session, A.r), mat_mul(mat_inverse(A.psi), difference))
    status, witness = "sigma-fixed", None
    for a, row in enumerate(delta):
        for b, x in enumerate(row):
            ok, info = is_sigma_fixed(x)
            if ok:
                continue
            entry_status = "undetermined" if info["reason"] == "constant term unknown" else "not-sigma-fixed"
            if status == "sigma-fixed" or (status == "undetermined" and entry_status == "not-sigma-fixed"):
                status, witness = entry_status, dict(info, row=a, col=b)
    constants = None
    if status == "sigma-fixed":
        constants = [[[x.coefficient(0, i).coefficient(0).to_dict() for i in x.indices() if i >= 0]
                      for x in row] for row in delta]
    elif status == "undetermined":
        logger.warning(f"ambiguity: sigma-fixedness undetermined at {witness}")
    sigma_fixed = {"sigma-fixed": True, "not-sigma-fixed": False, "undetermined": None}[status]
    return {"delta": delta, "sigma_fixed": sigma_fixed, "status": status, "witness": witness,
            "constants": constants}


def gamma_act(A: FundamentalPair, gamma: Matrix) -> FundamentalPair:
    """(Phi, Psi*gamma) for a sigma-fixed invertible gamma"""
    if mat_shape(gamma) != (A.r, A.r):
        raise ShapeMismatchError(f"gamma must be {A.r}x{A.r}")
    for a, row in enumerate(gamma):
        for b, x in enumerate(row):
            ok, info = is_sigma_fixed(x)
            if ok:
                continue
            if info["reason"] == "constant term unknown":
                raise PrecisionError(f"gamma[{a}][{b}] is known only to cap {info['exponent']}")
            raise NotSigmaFixedError(f"gamma[{a}][{b}] is not sigma-fixed: {info['reason']}")
    if not _det_is_unit(gamma):
        raise SingularMatrixError("gamma is not invertible")
    return _require(verify_fundamental(A.session, A.phi, mat_mul(A.psi, gamma)), "gamma action")


def phi_fixed_basis_check(A: FundamentalPair) -> Dict:
    """Columns of Psi^-1 satisfy sigma(Psi^-1) = Psi^-1 Phi^-1"""
    psi_inv = mat_inverse(A.psi)
    residual = mat_sub(mat_sigma(psi_inv), mat_mul(psi_inv, A.phi.inverse().expand(A.session)))
    summary = _residual_summary(residual)
    if summary["worst_entry"] is not None:
        reason = "residual"
    else:
        reason = "precision-shortfall" if _shortfall(summary["verified_cap"], None) else None
    return {"passed": reason is None, "reason": reason, **summary}


def constant_matrix(session: Session, rows: Sequence[Sequence]) -> Matrix:
    """Matrix of expanded exact scalars (t-constants give sigma-fixed entries)"""
    return [[session.expand(x) for x in row] for row in rows]
