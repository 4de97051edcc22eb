"""
Model of the v-adic completion as a product of Laurent series rings

A VadicElement has one component per root lambda_l of v; component l stores the
coefficients a_{l,i} of (t - lambda_l)^i, i_min <= i < n_t, as Hahn series in
u = theta - lambda_0. Coefficients with i >= n_t are unknown except for an
optional tail bound v(a_{l,i}) >= slope*i + intercept.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import galois

from app_config import config
from errors import DivergenceError, NonUnitError, PrecisionError, ShapeMismatchError
from exact_scalar import ExactScalar
from field_tower import (FieldElement, FieldSpec, FieldTower, common_spec, element_from_dict,
                         embed_values, frobenius_power, is_irreducible, poly_roots)
from hahn_series import INF, Cap, HahnSeries, SeriesBudget, UNBOUNDED, as_cap, cap_to_str
from logger_config import solver_logger
from validators import ValidationError

logger = logging.getLogger(__name__)

Tail = Optional[Tuple[Fraction, Cap]]
EXACT_ZERO_TAIL: Tail = (Fraction(0), INF)


@dataclass(frozen=True)
class PlaceData:
    """Monic irreducible v over F_q with roots ordered by lambda_l^q = lambda_{l+1}"""
    q: int
    v: Tuple[int, ...]
    lambdas: Tuple[FieldElement, ...]
    ref: int = 0

    @property
    def d(self) -> int:
        return len(self.v) - 1

    @classmethod
    def build(cls, tower: FieldTower, v: Sequence[int]) -> "PlaceData":
        """Roots of v in F_{q^d}; lambda_0 is the least root"""
        v = tuple(int(c) for c in v)
        if not is_irreducible(tower.base, v):
            raise ValidationError("v not irreducible over F_q")
        d = len(v) - 1
        spec = tower.ensure_degree(tower.base.s * d, reason="roots of v")
        GF = spec.gf
        coeffs = embed_values(list(reversed(v)), tower.base, spec)
        roots = poly_roots(galois.Poly(GF(coeffs), field=GF))
        lam0 = FieldElement(spec, roots[0])
        lambdas = tuple(frobenius_power(lam0, l) for l in range(d))
        return cls(tower.q, v, lambdas)

    def rotated(self, k: int) -> "PlaceData":
        """Relabel so that lambda_k becomes the reference root"""
        k %= self.d
        return PlaceData(self.q, self.v, self.lambdas[k:] + self.lambdas[:k])

    @property
    def reference(self) -> FieldElement:
        return self.lambdas[self.ref]

    def to_dict(self) -> Dict:
        return {"v": list(self.v), "lambdas": [lam.to_dict() for lam in self.lambdas]}

    @classmethod
    def from_dict(cls, data: Dict, spec: FieldSpec) -> "PlaceData":
        return cls(spec.q, tuple(int(c) for c in data["v"]),
                   tuple(element_from_dict(lam, spec) for lam in data["lambdas"]))


def _min_tail(a: Tail, b: Tail) -> Tail:
    if a is None or b is None:
        return None
    if a[1] == INF:
        return b
    if b[1] == INF:
        return a
    return (min(a[0], b[0]), min(a[1], b[1]))


class VadicElement:
    """Truncated element of prod_l K((t - lambda_l)) under the fixed embedding"""

    __slots__ = ("place", "components", "i_min", "n_t", "tails")

    def __init__(self, place: PlaceData, components: Sequence[Sequence[HahnSeries]],
                 i_min: int = 0, n_t: int = None, tails: Sequence[Tail] = None):
        components = tuple(tuple(row) for row in components)
        if len(components) != place.d:
            raise ShapeMismatchError(f"Expected {place.d} components, got {len(components)}")
        width = len(components[0])
        if any(len(row) != width for row in components):
            raise ShapeMismatchError("Components store different index ranges")
        self.place = place
        self.components = components
        self.i_min = i_min
        self.n_t = i_min + width if n_t is None else n_t
        if self.n_t - i_min != width:
            raise ShapeMismatchError("n_t does not match the stored index range")
        self.tails = tuple(tails) if tails is not None else (None,) * place.d

    # Constructors

    @classmethod
    def constant(cls, place: PlaceData, value: HahnSeries, n_t: int) -> "VadicElement":
        zero = HahnSeries.zero(value.spec, budget=value.budget)
        row = [value] + [zero] * (n_t - 1)
        return cls(place, [row] * place.d, 0, n_t, [EXACT_ZERO_TAIL] * place.d)

    @classmethod
    def zero(cls, place: PlaceData, spec: FieldSpec, n_t: int,
             budget: SeriesBudget = UNBOUNDED) -> "VadicElement":
        return cls.constant(place, HahnSeries.zero(spec, budget=budget), n_t)

    @classmethod
    def one(cls, place: PlaceData, spec: FieldSpec, n_t: int,
            budget: SeriesBudget = UNBOUNDED) -> "VadicElement":
        return cls.constant(place, HahnSeries.one(spec, budget), n_t)

    # Access

    @property
    def d(self) -> int:
        return self.place.d

    @property
    def spec(self) -> FieldSpec:
        spec = self.components[0][0].spec
        for row in self.components:
            for a in row:
                spec = common_spec(spec, a.spec)
        return spec

    @property
    def budget(self) -> SeriesBudget:
        return self.components[0][0].budget

    def coefficient(self, l: int, i: int) -> HahnSeries:
        l %= self.d
        if i >= self.n_t:
            raise PrecisionError(f"Coefficient {i} is beyond the t-precision {self.n_t}")
        if i < self.i_min:
            return HahnSeries.zero(self.components[l][0].spec, budget=self.budget)
        return self.components[l][i - self.i_min]

    def indices(self) -> range:
        return range(self.i_min, self.n_t)

    def min_cap(self) -> Cap:
        return min(a.cap for row in self.components for a in row)

    def tail_bound(self, l: int, start: int) -> Tail:
        """Linear lower bound on v(a_{l,i}) valid for all i >= start"""
        tail = self.tails[l % self.d]
        if tail is None:
            return None
        slope, intercept = tail
        for i in range(max(start, self.i_min), self.n_t):
            val = self.components[l % self.d][i - self.i_min].valuation()
            if val != INF:
                intercept = min(intercept, val - slope * i)
        return (slope, intercept)

    def valuation_table(self) -> Dict[Tuple[int, int], Cap]:
        return {(l, i): self.coefficient(l, i).valuation()
                for l in range(self.d) for i in self.indices()}

    # Reshaping

    def truncate_t(self, n_t: int) -> "VadicElement":
        """Forget coefficients with index >= n_t"""
        if n_t >= self.n_t:
            return self
        tails = [self.tail_bound(l, n_t) for l in range(self.d)]
        return VadicElement(self.place, [row[:n_t - self.i_min] for row in self.components],
                            self.i_min, n_t, tails)

    def _window(self, i_min: int, n_t: int, spec: FieldSpec) -> List[List[HahnSeries]]:
        return [[self.coefficient(l, i).lift(spec) for i in range(i_min, n_t)] for l in range(self.d)]

    # Ring operations

    def _check_place(self, other: "VadicElement"):
        if other.place.v != self.place.v or other.place.lambdas != self.place.lambdas:
            raise ShapeMismatchError("VadicElements belong to different places")

    def __add__(self, other) -> "VadicElement":
        if isinstance(other, (HahnSeries, int, FieldElement)):
            other = self._constant_like(other)
        self._check_place(other)
        spec = common_spec(self.spec, other.spec)
        i_min, n_t = min(self.i_min, other.i_min), min(self.n_t, other.n_t)
        a, b = self._window(i_min, n_t, spec), other._window(i_min, n_t, spec)
        comps = [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]
        tails = [_min_tail(self.tail_bound(l, n_t), other.tail_bound(l, n_t)) for l in range(self.d)]
        return VadicElement(self.place, comps, i_min, n_t, tails)

    __radd__ = __add__

    def __neg__(self) -> "VadicElement":
        return VadicElement(self.place, [[-a for a in row] for row in self.components],
                            self.i_min, self.n_t, self.tails)

    def __sub__(self, other) -> "VadicElement":
        if isinstance(other, (HahnSeries, int, FieldElement)):
            other = self._constant_like(other)
        return self + (-other)

    def __rsub__(self, other) -> "VadicElement":
        return (-self) + other

    def _constant_like(self, value) -> "VadicElement":
        if isinstance(value, int):
            value = FieldElement(self.spec, value % self.spec.p)
        if isinstance(value, FieldElement):
            value = HahnSeries.constant(value, self.budget)
        return VadicElement.constant(self.place, value, self.n_t)

    def scale(self, c) -> "VadicElement":
        """Multiply every coefficient by one constant series"""
        if isinstance(c, (int, FieldElement)):
            comps = [[a.scale(c) for a in row] for row in self.components]
            return VadicElement(self.place, comps, self.i_min, self.n_t, self.tails)
        comps = [[a * c for a in row] for row in self.components]
        shift = c.valuation()
        tails = [None if t is None else (t[0], t[1] + shift) for t in self.tails]
        return VadicElement(self.place, comps, self.i_min, self.n_t, tails)

    def __mul__(self, other) -> "VadicElement":
        if isinstance(other, (int, FieldElement, HahnSeries)):
            return self.scale(other)
        self._check_place(other)
        spec = common_spec(self.spec, other.spec)
        i_min = self.i_min + other.i_min
        n_t = min(self.n_t + other.i_min, other.n_t + self.i_min)
        a = self._window(self.i_min, self.n_t, spec)
        b = other._window(other.i_min, other.n_t, spec)
        comps = []
        for l in range(self.d):
            row = []
            for k in range(i_min, n_t):
                acc = HahnSeries.zero(spec, budget=self.budget)
                for i in range(self.i_min, self.n_t):
                    j = k - i
                    if other.i_min <= j < other.n_t:
                        x, y = a[l][i - self.i_min], b[l][j - other.i_min]
                        if not (x.is_zero() and x.is_exact()) and not (y.is_zero() and y.is_exact()):
                            acc = acc + x * y
                row.append(acc)
            comps.append(row)
        tails = [self._product_tail(other, l) for l in range(self.d)]
        return VadicElement(self.place, comps, i_min, n_t, tails)

    __rmul__ = __mul__

    def _product_tail(self, other: "VadicElement", l: int) -> Tail:
        if self.i_min < 0 or other.i_min < 0:
            return None
        a, b = self.tail_bound(l, self.i_min), other.tail_bound(l, other.i_min)
        if a is None or b is None:
            return None
        return (min(a[0], b[0]), a[1] + b[1])

    def __pow__(self, n: int) -> "VadicElement":
        if n < 0:
            return self.inverse() ** (-n)
        result = VadicElement.one(self.place, self.spec, self.n_t, self.budget)
        for _ in range(n):
            result = result * self
        return result

    def inverse(self, prec: Cap = None) -> "VadicElement":
        """Componentwise inverse of a Laurent series in t - lambda_l"""
        spec = self.spec
        lead = None
        for i in self.indices():
            if any(not self.coefficient(l, i).is_zero() for l in range(self.d)):
                lead = i
                break
            if any(not self.coefficient(l, i).is_exact() for l in range(self.d)):
                raise NonUnitError(f"Coefficient {i} is unknown, leading term undetermined")
        if lead is None:
            raise NonUnitError("Cannot invert a zero v-adic element")
        width = self.n_t - lead
        comps = []
        for l in range(self.d):
            a = [self.coefficient(l, lead + k).lift(spec) for k in range(width)]
            if a[0].is_zero():
                raise NonUnitError(f"Component {l} has no known leading coefficient")
            if prec is None and a[0].is_exact() and len(a[0]) > 1:
                a0_inv = a[0].inv(config.DEFAULT_PREC_U)
            else:
                a0_inv = a[0].inv(prec)
            b = [a0_inv]
            for k in range(1, width):
                acc = HahnSeries.zero(spec, budget=self.budget)
                for j in range(1, k + 1):
                    if not (a[j].is_zero() and a[j].is_exact()):
                        acc = acc + a[j] * b[k - j]
                b.append(-(acc * a0_inv))
            comps.append(b)
        return VadicElement(self.place, comps, -lead, -lead + width, None)

    def sigma(self) -> "VadicElement":
        """Component l receives q-powers of component l-1"""
        comps = [[a.q_power(1) for a in self.components[(l - 1) % self.d]] for l in range(self.d)]
        q = self.place.q
        tails = [self.tails[(l - 1) % self.d] for l in range(self.d)]
        tails = [None if t is None else (t[0] * q, t[1] * q if t[1] != INF else INF) for t in tails]
        return VadicElement(self.place, comps, self.i_min, self.n_t, tails)

    def sigma_power(self, j: int) -> "VadicElement":
        x = self
        for _ in range(j):
            x = x.sigma()
        return x

    # Comparison

    def residual_valuation(self) -> Cap:
        """Least valuation over all stored coefficients (cap for empty ones)"""
        return min(a.valuation() for row in self.components for a in row)

    def agrees_with(self, other: "VadicElement") -> bool:
        diff = self - other
        return all(a.is_zero() for row in diff.components for a in row)

    def __repr__(self):
        return f"VadicElement(d={self.d}, i=[{self.i_min},{self.n_t}))"

    # Serialization

    def to_dict(self) -> Dict:
        return {
            "v": list(self.place.v),
            "Nt": self.n_t,
            "i_min": self.i_min,
            "components": {
                str(l): {str(i): self.coefficient(l, i).to_dict() for i in self.indices()}
                for l in range(self.d)
            },
            "tails": {
                str(l): None if t is None else {"slope": str(t[0]), "intercept": cap_to_str(t[1])}
                for l, t in enumerate(self.tails)
            },
        }

    @classmethod
    def from_dict(cls, data: Dict, place: PlaceData, spec: FieldSpec,
                  budget: SeriesBudget = UNBOUNDED) -> "VadicElement":
        if [int(c) for c in data["v"]] != list(place.v):
            raise ShapeMismatchError("Artifact belongs to a different place v")
        i_min, n_t = int(data.get("i_min", 0)), int(data["Nt"])
        comps = [
            [HahnSeries.from_dict(data["components"][str(l)][str(i)], spec, budget) for i in range(i_min, n_t)]
            for l in range(place.d)
        ]
        tails = []
        for l in range(place.d):
            entry = data.get("tails", {}).get(str(l))
            tails.append(None if entry is None else (Fraction(entry["slope"]), as_cap(entry["intercept"])))
        return cls(place, comps, i_min, n_t, tails)


def expand_exact(x: ExactScalar, place: PlaceData, n_t: int, prec_u: Cap,
                 budget: SeriesBudget = UNBOUNDED) -> VadicElement:
    """Expansion of an exact scalar at every root of v"""
    lam0 = place.reference
    comps, tails = [], []
    for lam in place.lambdas:
        coeffs, tail = x.expand_at(lam, lam0, n_t, prec_u, budget)
        comps.append(coeffs)
        tails.append(tail)
    return VadicElement(place, comps, 0, n_t, tails)


def is_sigma_fixed(x: VadicElement) -> Tuple[bool, Optional[Dict]]:
    """Constant coefficients with a_{l,i}^q = a_{l+1,i}; witness names a violation

    A definite violation anywhere is reported before an unknown constant term.
    """
    unknown = None
    for i in x.indices():
        for l in range(x.d):
            a = x.coefficient(l, i)
            if any(e != 0 for e in a.exps):
                bad = next(e for e in a.exps if e != 0)
                return False, {"l": l, "i": i, "exponent": str(bad), "reason": "theta-dependent coefficient"}
            if not a.is_exact() and a.cap <= 0 and unknown is None:
                unknown = {"l": l, "i": i, "exponent": cap_to_str(a.cap), "reason": "constant term unknown"}
    for i in x.indices():
        for l in range(x.d):
            a = x.coefficient(l, i).truncate(Fraction(1))
            b = x.coefficient(l + 1, i).truncate(Fraction(1))
            if a.cap <= 0 or b.cap <= 0:
                continue
            if not a.q_power(1).truncate(Fraction(1)).agrees_with(b):
                return False, {"l": l, "i": i, "exponent": "0", "reason": "a_{l,i}^q != a_{l+1,i}"}
    if unknown is not None:
        return False, unknown
    return True, None


@dataclass
class Evaluation:
    """Value of a v-adic element at t = theta^(q^(d*nu))"""
    value: HahnSeries
    achieved_cap: Cap
    nu: int
    term_valuations: List[Cap] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {
            "nu": self.nu,
            "value": self.value.to_dict(),
            "achieved_cap": cap_to_str(self.achieved_cap),
            "term_valuations": [cap_to_str(v) for v in self.term_valuations],
        }


def eval_theta_power(x: VadicElement, nu: int = 0, window: int = None,
                     strict: bool = True) -> Evaluation:
    """Substitute t - lambda_ref -> u^(q^(d*nu)) in the reference component"""
    window = window or config.DIVERGENCE_WINDOW
    Q = x.place.q ** (x.d * nu)
    ref = x.place.ref
    spec = x.spec
    value = HahnSeries.zero(spec, budget=x.budget)
    term_vals: List[Cap] = []
    streak = 0
    for i in x.indices():
        a = x.coefficient(ref, i)
        term = a.shift(i * Q)
        val = term.valuation()
        if term_vals and val != INF and term_vals[-1] != INF and val <= term_vals[-1]:
            streak += 1
            if streak >= window:
                solver_logger.log_divergence(i, window)
                raise DivergenceError(f"Term valuations stopped increasing at index {i}")
        elif val != INF:
            streak = 0
        if val != INF:
            term_vals.append(val)
        value = value + term

    tail = x.tail_bound(ref, x.n_t)
    if tail is None:
        raise PrecisionError("No bound on the omitted coefficients; cannot certify the value")
    slope, intercept = tail
    if intercept == INF:
        tail_cap = INF
    elif slope + Q <= 0:
        raise PrecisionError("Tail bound does not force convergence at this nu")
    else:
        tail_cap = (slope + Q) * x.n_t + intercept
    achieved = min(value.cap, tail_cap)
    value = value.truncate(achieved)
    if strict and value.is_zero() and achieved != INF:
        raise PrecisionError(f"Value is indistinguishable from 0 at achieved cap {achieved}")
    return Evaluation(value, achieved, nu, term_vals)
