"""
Finite fields F_{q^M} with on-demand tower extension, embeddings and Frobenius

Elements are stored as galois integers: the value sum(c_k * p**k) stands for
sum(c_k * a**k) where a is a root of the field's defining polynomial.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from math import lcm
from typing import Dict, List, Optional, Sequence, Tuple

import galois
import numpy as np

from app_config import config
from errors import EmbeddingError, FieldDegreeExceeded, NotInField
from logger_config import tower_logger

logger = logging.getLogger(__name__)


def int_to_digits(value: int, p: int, n: int) -> List[int]:
    """Little-endian base-p digits of a field element"""
    digits = []
    for _ in range(n):
        value, c = divmod(value, p)
        digits.append(c)
    return digits


def digits_to_int(digits: Sequence[int], p: int) -> int:
    """Inverse of int_to_digits"""
    value = 0
    for c in reversed(list(digits)):
        value = value * p + int(c) % p
    return value


@lru_cache(maxsize=None)
def find_irreducible(p: int, n: int) -> Tuple[int, ...]:
    """Least monic irreducible of degree n over F_p, little-endian coefficients"""
    if n < 1:
        raise ValueError("degree must be at least 1")
    if n == 1:
        return (0, 1)
    poly = galois.irreducible_poly(p, n, method="min")
    return tuple(int(c) for c in reversed(poly.coeffs))


@lru_cache(maxsize=None)
def galois_field(p: int, modulus: Tuple[int, ...]):
    """galois FieldArray class for F_p[X]/(modulus)"""
    n = len(modulus) - 1
    if n == 1:
        return galois.GF(p)
    poly = galois.Poly(list(reversed(modulus)), field=galois.GF(p))
    return galois.GF(p**n, irreducible_poly=poly, verify=False)


def binomial_mod(n: int, k: int, p: int) -> int:
    """C(n, k) mod p by Lucas' theorem"""
    if k < 0 or k > n:
        return 0
    result = 1
    while n or k:
        ni, ki = n % p, k % p
        if ki > ni:
            return 0
        num = den = 1
        for j in range(ki):
            num = num * (ni - j) % p
            den = den * (j + 1) % p
        result = result * num * pow(den, -1, p) % p
        n //= p
        k //= p
    return result


def poly_roots(poly) -> List[int]:
    """Distinct roots of a galois Poly in its own field, sorted"""
    if poly.degree < 1:
        return []
    monic = poly // galois.Poly([poly.coeffs[0]], field=poly.field)
    roots = set()
    square_free, _ = monic.square_free_factors()
    for part in square_free:
        if part.degree < 1:
            continue
        factors, degrees = part.distinct_degree_factors()
        for factor, degree in zip(factors, degrees):
            if degree != 1:
                continue
            linear = [factor] if factor.degree == 1 else factor.equal_degree_factors(1)
            for lin in linear:
                roots.add(int(-lin.coeffs[1] / lin.coeffs[0]))
    return sorted(roots)


def root_degrees(poly) -> List[int]:
    """Degrees of the irreducible factors of a galois Poly over its field"""
    if poly.degree < 1:
        return []
    monic = poly // galois.Poly([poly.coeffs[0]], field=poly.field)
    degrees = []
    square_free, _ = monic.square_free_factors()
    for part in square_free:
        if part.degree < 1:
            continue
        _, ddf = part.distinct_degree_factors()
        degrees.extend(int(d) for d in ddf)
    return degrees


@dataclass(frozen=True)
class FieldSpec:
    """A working field F_{p^n}, n = M*s, with its embedding table"""
    p: int
    s: int
    modulus: Tuple[int, ...]
    embeddings: Tuple[Tuple[Tuple[int, ...], int], ...] = ()

    @property
    def degree(self) -> int:
        return len(self.modulus) - 1

    @property
    def q(self) -> int:
        return self.p ** self.s

    @property
    def order(self) -> int:
        return self.p ** self.degree

    @property
    def M(self) -> int:
        return self.degree // self.s

    @property
    def gf(self):
        return galois_field(self.p, self.modulus)

    def same_field(self, other: "FieldSpec") -> bool:
        return self.p == other.p and self.modulus == other.modulus

    def image_of(self, sub: "FieldSpec") -> Optional[int]:
        """Image of sub's generator in this field, if recorded"""
        for modulus, image in self.embeddings:
            if modulus == sub.modulus:
                return image
        return None

    def element(self, value: int) -> "FieldElement":
        return FieldElement(self, int(value))

    def zero(self) -> "FieldElement":
        return FieldElement(self, 0)

    def one(self) -> "FieldElement":
        return FieldElement(self, 1)

    def generator(self) -> "FieldElement":
        """Root of the defining polynomial"""
        return FieldElement(self, self.p if self.degree > 1 else 0)

    def elements(self) -> List["FieldElement"]:
        return [FieldElement(self, v) for v in range(self.order)]

    def to_dict(self) -> Dict:
        return {
            "p": self.p,
            "s": self.s,
            "modulus": list(self.modulus),
            "embeddings": [
                {"modulus": list(m), "image": int_to_digits(img, self.p, self.degree)}
                for m, img in self.embeddings
            ],
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "FieldSpec":
        p = int(data["p"])
        modulus = tuple(int(c) for c in data["modulus"])
        embeddings = tuple(
            (tuple(int(c) for c in entry["modulus"]), digits_to_int(entry["image"], p))
            for entry in data.get("embeddings", [])
        )
        return cls(p, int(data["s"]), modulus, embeddings)


def base_spec(p: int, s: int) -> FieldSpec:
    """The coefficient field F_q, q = p^s"""
    return FieldSpec(p, s, find_irreducible(p, s))


def is_irreducible(spec: FieldSpec, coeffs: Sequence[int]) -> bool:
    """Whether the little-endian polynomial over spec's field is irreducible"""
    poly = galois.Poly(list(reversed([int(c) for c in coeffs])), field=spec.gf)
    return poly.degree >= 1 and bool(poly.is_irreducible())


def common_spec(a: FieldSpec, b: FieldSpec) -> FieldSpec:
    """The larger of two specs of one tower"""
    if a.same_field(b):
        return a if len(a.embeddings) >= len(b.embeddings) else b
    if a.p != b.p:
        raise EmbeddingError(f"Fields of characteristic {a.p} and {b.p} do not mix")
    big, small = (a, b) if a.degree >= b.degree else (b, a)
    if small.degree == 1 or big.image_of(small) is not None:
        return big
    raise EmbeddingError(f"No recorded embedding of degree {small.degree} into degree {big.degree}")


def embed_values(values: Sequence[int], src: FieldSpec, dst: FieldSpec) -> List[int]:
    """Embed galois integers of src into dst"""
    if src.same_field(dst) or src.degree == 1:
        return [int(v) for v in values]
    if dst.degree % src.degree != 0:
        raise EmbeddingError(f"Degree {src.degree} does not divide {dst.degree}")
    image = dst.image_of(src)
    if image is None:
        image = _least_root(src.modulus, dst)
    GF = dst.gf
    powers = GF(image) ** np.arange(src.degree)
    if not len(values):
        return []
    digits = GF(np.array([int_to_digits(int(v), src.p, src.degree) for v in values]))
    return [int(x) for x in (digits * powers).sum(axis=-1)]


def _least_root(modulus: Tuple[int, ...], dst: FieldSpec) -> int:
    roots = poly_roots(galois.Poly(list(reversed(modulus)), field=dst.gf))
    if not roots:
        raise EmbeddingError("Subfield polynomial has no root in the target field")
    return roots[0]


def extend(spec: FieldSpec, factor: int) -> FieldSpec:
    """Extension of degree `factor` over spec, with a composed embedding table"""
    if factor == 1:
        return spec
    degree = spec.degree * factor
    modulus = find_irreducible(spec.p, degree)
    target = FieldSpec(spec.p, spec.s, modulus)
    if spec.degree == 1:
        return target
    root = _least_root(spec.modulus, target)
    table = [(spec.modulus, root)]
    if spec.embeddings:
        images = embed_values([img for _, img in spec.embeddings], spec,
                              FieldSpec(spec.p, spec.s, modulus, ((spec.modulus, root),)))
        table = [(m, img) for (m, _), img in zip(spec.embeddings, images)] + table
    return FieldSpec(spec.p, spec.s, modulus, tuple(table))


def frobenius_array(arr, spec: FieldSpec, times: int):
    """Apply x -> x^p `times` times (reduced modulo the field degree)"""
    for _ in range(times % spec.degree if spec.degree > 1 else 0):
        arr = arr ** spec.p
    return arr


@lru_cache(maxsize=None)
def minimal_poly_key(spec: "FieldSpec", value: int) -> Tuple[int, ...]:
    """Coefficients of the minimal polynomial over F_p; equal under every embedding"""
    if value < spec.p:
        return (1, (spec.p - value) % spec.p)
    return tuple(int(c) for c in spec.gf(value).minimal_poly().coeffs)


@dataclass(frozen=True)
class FieldElement:
    """Element of a working field"""
    spec: FieldSpec
    value: int

    def _lift_pair(self, other):
        if isinstance(other, int):
            other = FieldElement(self.spec, other % self.spec.p)
        spec = common_spec(self.spec, other.spec)
        return embed(self, spec), embed(other, spec), spec

    def _binary(self, other, op):
        a, b, spec = self._lift_pair(other)
        GF = spec.gf
        return FieldElement(spec, int(op(GF(a.value), GF(b.value))))

    def __add__(self, other):
        return self._binary(other, lambda x, y: x + y)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda x, y: x - y)

    def __rsub__(self, other):
        return self._binary(other, lambda x, y: y - x)

    def __mul__(self, other):
        return self._binary(other, lambda x, y: x * y)

    __rmul__ = __mul__

    def __truediv__(self, other):
        a, b, spec = self._lift_pair(other)
        if b.value == 0:
            raise ZeroDivisionError("division by zero field element")
        GF = spec.gf
        return FieldElement(spec, int(GF(a.value) / GF(b.value)))

    def __neg__(self):
        GF = self.spec.gf
        return FieldElement(self.spec, int(-GF(self.value)))

    def __pow__(self, n: int):
        if n < 0 and self.value == 0:
            raise ZeroDivisionError("zero has no inverse")
        GF = self.spec.gf
        return FieldElement(self.spec, int(GF(self.value) ** n))

    def inverse(self) -> "FieldElement":
        return self ** -1

    def is_zero(self) -> bool:
        return self.value == 0

    def __bool__(self):
        return self.value != 0

    def __eq__(self, other):
        if isinstance(other, int):
            return self.value == other and other < self.spec.p
        if not isinstance(other, FieldElement):
            return NotImplemented
        try:
            a, b, _ = self._lift_pair(other)
        except EmbeddingError:
            return False
        return a.value == b.value

    def __hash__(self):
        return hash(minimal_poly_key(self.spec, self.value))

    def __lt__(self, other: "FieldElement"):
        a, b, _ = self._lift_pair(other)
        return a.value < b.value

    def __repr__(self):
        return f"FieldElement({self.value} in F_{self.spec.p}^{self.spec.degree})"

    def to_dict(self) -> Dict:
        return {"deg": self.spec.degree, "coeffs": int_to_digits(self.value, self.spec.p, self.spec.degree)}


def element_from_dict(data: Dict, spec: FieldSpec) -> FieldElement:
    """Decode {"deg", "coeffs"} inside spec's tower"""
    deg = int(data["deg"])
    value = digits_to_int(data["coeffs"], spec.p)
    if deg == spec.degree:
        return FieldElement(spec, value)
    if deg == 1:
        return FieldElement(spec, value)
    for modulus, _ in spec.embeddings:
        if len(modulus) - 1 == deg:
            return FieldElement(FieldSpec(spec.p, spec.s, modulus), value)
    raise EmbeddingError(f"No field of degree {deg} recorded in the tower")


def embed(x: FieldElement, target: FieldSpec) -> FieldElement:
    """Ring-homomorphic image of x in target"""
    if x.spec.same_field(target):
        return FieldElement(target, x.value)
    return FieldElement(target, embed_values([x.value], x.spec, target)[0])


def frobenius_power(x: FieldElement, j: int) -> FieldElement:
    """x^(q^j); j may be negative"""
    spec = x.spec
    times = (j % spec.M) * spec.s
    return FieldElement(spec, int(frobenius_array(spec.gf(x.value), spec, times)))


def qth_root(x: FieldElement, e: int = 1) -> FieldElement:
    """The unique y with y^(q^e) = x"""
    return frobenius_power(x, -e)


def nth_root(x: FieldElement, m: int) -> FieldElement:
    """Least y in x's field with y^m = x; NotInField if there is none"""
    if m < 1 or m % x.spec.p == 0:
        raise ValueError("m must be positive and prime to p")
    if x.value == 0:
        return x
    GF = x.spec.gf
    poly = galois.Poly.Degrees([m, 0], coeffs=GF([1, int(-GF(x.value))]), field=GF)
    roots = poly_roots(poly)
    if not roots:
        raise NotInField(f"x^{m} = {x.value} has no root in F_{x.spec.p}^{x.spec.degree}")
    return FieldElement(x.spec, roots[0])


def _additive_matrix(e: int, gamma: FieldElement, spec: FieldSpec):
    """F_p-matrix of x -> gamma*x^(q^e) - x on the power basis"""
    GF = spec.gf
    GFp = galois.GF(spec.p)
    n = spec.degree
    basis = GF([spec.p**k for k in range(n)]) if n > 1 else GF([1])
    images = GF(gamma.value) * frobenius_array(basis, spec, e * spec.s) - basis
    columns = [int_to_digits(int(v), spec.p, n) for v in images]
    return GFp(np.array(columns, dtype=int).T.reshape(n, n))


def roots_additive(e: int, gamma: FieldElement, beta: FieldElement) -> List[FieldElement]:
    """All x in the working field with gamma*x^(q^e) - x + beta = 0, sorted"""
    if gamma.value == 0:
        raise ValueError("gamma must be nonzero")
    gamma, beta, spec = gamma._lift_pair(beta)
    n = spec.degree
    GFp = galois.GF(spec.p)
    A = _additive_matrix(e, gamma, spec)
    rhs = GFp(np.array(int_to_digits(int(-spec.gf(beta.value)), spec.p, n), dtype=int).reshape(n, 1))
    reduced = np.concatenate([A, rhs], axis=1).row_reduce()
    particular = [0] * n
    for row in reduced:
        nonzero = np.nonzero(row)[0]
        if not len(nonzero):
            continue
        pivot = int(nonzero[0])
        if pivot == n:
            return []
        particular[pivot] = int(row[n])
    kernel = A.null_space()
    solutions = set()
    for combo in product(range(spec.p), repeat=kernel.shape[0]):
        vec = GFp(particular)
        for c, basis_row in zip(combo, kernel):
            vec = vec + GFp(c) * basis_row
        solutions.add(digits_to_int([int(c) for c in vec], spec.p))
    return [FieldElement(spec, v) for v in sorted(solutions)]


class FieldTower:
    """Session working field: one current spec, extended on demand"""

    def __init__(self, p: int, s: int, max_field_deg: int = None):
        self.base = base_spec(p, s)
        self.current = self.base
        self.max_field_deg = max_field_deg or config.DEFAULT_MAX_FIELD_DEG

    @property
    def p(self) -> int:
        return self.base.p

    @property
    def q(self) -> int:
        return self.base.q

    def ensure_degree(self, degree: int, reason: str = None) -> FieldSpec:
        """Make the working field contain F_{p^degree}"""
        target = lcm(self.current.degree, degree)
        if target == self.current.degree:
            return self.current
        if target > self.max_field_deg:
            tower_logger.log_cap_exceeded(self.p, target, self.max_field_deg)
            raise FieldDegreeExceeded(
                f"Working field degree {target} exceeds max-field-deg {self.max_field_deg}"
            )
        old = self.current.degree
        self.current = extend(self.current, target // old)
        tower_logger.log_extension(self.p, old, target, reason)
        return self.current

    def adopt(self, spec: FieldSpec) -> FieldSpec:
        """Continue a replayed session whose working field is spec"""
        if spec.same_field(self.current):
            self.current = common_spec(spec, self.current)
        elif spec.degree > self.current.degree and (
            self.current.degree == 1 or spec.image_of(self.current) is not None
        ):
            self.current = spec
        elif self.current.degree > spec.degree and (spec.degree == 1 or self.current.image_of(spec) is not None):
            pass
        else:
            raise EmbeddingError("Artifact field is not part of this session's tower")
        return self.current

    def lift(self, x: FieldElement) -> FieldElement:
        return embed(x, common_spec(x.spec, self.current))

    def element(self, value: int) -> FieldElement:
        return FieldElement(self.current, value)

    def nth_root(self, x: FieldElement, m: int) -> FieldElement:
        """m-th root of x, extending the tower when needed"""
        try:
            return nth_root(x, m)
        except NotInField:
            GF = x.spec.gf
            poly = galois.Poly.Degrees([m, 0], coeffs=GF([1, int(-GF(x.value))]), field=GF)
            factor = min(root_degrees(poly))
            self.ensure_degree(x.spec.degree * factor, reason=f"{m}-th root")
            return nth_root(self.lift(x), m)

    def additive_roots(self, e: int, gamma: FieldElement, beta: FieldElement) -> List[FieldElement]:
        """Roots of gamma*x^(q^e) - x + beta, extending the tower until all exist"""
        gamma, beta = self.lift(gamma), self.lift(beta)
        spec = common_spec(gamma.spec, beta.spec)
        GF = spec.gf
        Q = self.q ** e
        poly = galois.Poly.Degrees([Q, 1, 0], coeffs=GF([gamma.value, spec.p - 1, beta.value]), field=GF)
        split = lcm(*root_degrees(poly)) if poly.degree > 0 else 1
        if split > 1:
            self.ensure_degree(spec.degree * split, reason="residue equation")
        return roots_additive(e, self.lift(gamma), self.lift(beta))

    def subfield(self, e: int) -> List[FieldElement]:
        """Elements of F_{q^e} inside the working field, sorted"""
        self.ensure_degree(self.base.s * e, reason=f"F_q^{e} constants")
        one = self.current.one()
        return roots_additive(e, one, self.current.zero())
