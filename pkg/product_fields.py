"""
Matrices over a product of finite fields Lambda = prod_l F_{p^(e*m_l)} containing a common E = F_{p^e}
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from errors import HypothesisError, ShapeMismatchError
from field_tower import FieldSpec, base_spec, embed_values, extend, int_to_digits
from logger_config import audit_logger, timed

logger = logging.getLogger(__name__)


@dataclass
class ProductFieldMatrix:
    """One s x m matrix per component field Lambda_l"""
    E: FieldSpec
    specs: List[FieldSpec]
    components: List[np.ndarray]

    def __post_init__(self):
        shapes = {tuple(c.shape) for c in self.components}
        if len(shapes) != 1:
            raise ShapeMismatchError("Component matrices must share one shape")
        if len(self.specs) != len(self.components):
            raise ShapeMismatchError("One field per component is required")

    @classmethod
    def build(cls, p: int, e: int, degrees: Sequence[int], entries: Sequence) -> "ProductFieldMatrix":
        """entries[l] is an s x m nested list of galois integers of Lambda_l"""
        E = base_spec(p, e)
        specs = [extend(E, m) for m in degrees]
        components = [spec.gf(np.array(rows, dtype=int)) for spec, rows in zip(specs, entries)]
        return cls(E, specs, components)

    @property
    def shape(self) -> Tuple[int, int]:
        return tuple(self.components[0].shape)

    @property
    def d_prime(self) -> int:
        return len(self.components)

    def e_images(self, l: int) -> List[int]:
        """Images of E's elements, in canonical order, inside Lambda_l"""
        return embed_values(list(range(self.E.order)), self.E, self.specs[l])

    def to_dict(self) -> Dict:
        return {
            "E": self.E.to_dict(),
            "fields": [spec.to_dict() for spec in self.specs],
            "components": [[[int_to_digits(int(x), spec.p, spec.degree) for x in row] for row in comp.tolist()]
                           for spec, comp in zip(self.specs, self.components)],
        }


def random_instance(rng: np.random.Generator, p: int, e: int, degrees: Sequence[int],
                    s: int, m: int) -> ProductFieldMatrix:
    """Random s x m matrix of full column rank in every component"""
    E = base_spec(p, e)
    specs = [extend(E, k) for k in degrees]
    components = []
    for spec in specs:
        GF = spec.gf
        while True:
            M = GF(rng.integers(0, spec.order, size=(s, m)))
            if np.linalg.matrix_rank(M) == m:
                break
        components.append(M)
    return ProductFieldMatrix(E, specs, components)


def _choose_constant(v: List, r: List, images: List[List[int]], order: List[int]) -> int:
    """Index of the first c in E (scan order) keeping every component of v + c*r nonzero"""
    forbidden = set()
    for l, (vl, rl) in enumerate(zip(v, r)):
        if not np.any(rl):
            continue
        if not np.any(vl):
            forbidden.add(0)
            continue
        j = int(np.nonzero(rl)[0][0])
        ratio = -vl[j] / rl[j]
        if np.array_equal(vl + ratio * rl, np.zeros_like(vl)):
            matches = [k for k, img in enumerate(images[l]) if img == int(ratio)]
            forbidden.update(matches)
    for k in order:
        if k not in forbidden:
            return k
    raise HypothesisError("No admissible constant in E; #E must exceed the number of components")


@timed("pf_reduce")
def pf_reduce(Dm: ProductFieldMatrix, seed: int = 0) -> Dict:
    """B over E and per-component A with B*D_l*A_l = [I_m; *] in every component"""
    s, m = Dm.shape
    if m > s:
        raise ShapeMismatchError(f"Need at least as many rows as columns, got {s} x {m}")
    if Dm.E.order <= Dm.d_prime:
        raise HypothesisError(f"#E = {Dm.E.order} must exceed the number of components {Dm.d_prime}")
    for l, comp in enumerate(Dm.components):
        if np.linalg.matrix_rank(comp) < m:
            raise HypothesisError(f"Component {l} has rank below {m}")

    GE = Dm.E.gf
    images = [Dm.e_images(l) for l in range(Dm.d_prime)]
    start = int(np.random.default_rng(seed).integers(0, Dm.E.order))
    order = [(start + k) % Dm.E.order for k in range(Dm.E.order)]

    B = GE(np.eye(s, dtype=int))
    A = [spec.gf(np.eye(m, dtype=int)) for spec in Dm.specs]
    M = [comp.copy() for comp in Dm.components]

    for k in range(m):
        for i in range(k + 1, s):
            v = [Ml[k, k:] for Ml in M]
            r = [Ml[i, k:] for Ml in M]
            if all(np.any(vl) for vl in v):
                break
            c = _choose_constant(v, r, images, order)
            if c == 0:
                continue
            for l, Ml in enumerate(M):
                Ml[k, :] = Ml[k, :] + Ml.__class__(images[l][c]) * Ml[i, :]
            B[k, :] = B[k, :] + GE(c) * B[i, :]
        for l, Ml in enumerate(M):
            GF = Ml.__class__
            row = Ml[k, k:]
            if not np.any(row):
                raise HypothesisError(f"Component {l} is rank-deficient at column {k}")
            j = k + int(np.nonzero(row)[0][0])
            if j != k:
                Ml[:, [k, j]] = Ml[:, [j, k]]
                A[l][:, [k, j]] = A[l][:, [j, k]]
            pivot = Ml[k, k]
            Ml[:, k] = Ml[:, k] / pivot
            A[l][:, k] = A[l][:, k] / pivot
            for jj in range(m):
                if jj != k and Ml[k, jj] != 0:
                    factor = GF(Ml[k, jj])
                    Ml[:, jj] = Ml[:, jj] - factor * Ml[:, k]
                    A[l][:, jj] = A[l][:, jj] - factor * A[l][:, k]
        logger.debug(f"pf_reduce: pivot row {k} placed")

    result = {"B": B, "A": A, "normal_form": M}
    result.update(check_reduction(Dm, B, A))
    audit_logger.log_verdict("pf-reduce", result["passed"])
    return result


def check_reduction(Dm: ProductFieldMatrix, B, A: List) -> Dict:
    """B invertible over E, each A_l invertible, B*D_l*A_l topped by the identity"""
    s, m = Dm.shape
    b_ok = bool(np.linalg.det(B) != 0)
    a_ok = all(bool(np.linalg.det(Al) != 0) for Al in A)
    top_ok = True
    for l, (comp, Al) in enumerate(zip(Dm.components, A)):
        GF = comp.__class__
        B_l = GF(np.array([_embed_row(row, Dm, l) for row in B.tolist()], dtype=int))
        N = B_l @ comp @ Al
        if not np.array_equal(N[:m, :], GF(np.eye(m, dtype=int))):
            top_ok = False
    return {"passed": b_ok and a_ok and top_ok, "B_invertible": b_ok, "A_invertible": a_ok,
            "identity_top": top_ok}


def _embed_row(row: List[int], Dm: ProductFieldMatrix, l: int) -> List[int]:
    return embed_values(row, Dm.E, Dm.specs[l])
