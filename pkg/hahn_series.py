"""
Truncated Hahn series in u = theta - lambda_ref

A series stores finitely many terms c*u^e (rational e, c in a working field)
and an absolute cap: it stands for an unknown x with v(x - stored part) >= cap.
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from errors import DenominatorBoundExceeded, HypothesisError, NonUnitError, PrecisionError
from field_tower import (FieldElement, FieldSpec, common_spec, element_from_dict, embed,
                         embed_values, frobenius_array)

INF = math.inf
Cap = Union[Fraction, float]


def as_cap(value) -> Cap:
    """Normalize a cap: Fraction, or math.inf for exact series"""
    if value is None or value == INF or value == "inf":
        return INF
    return Fraction(value)


def cap_to_str(cap: Cap) -> str:
    return "inf" if cap == INF else str(cap)


def default_max_denom(q: int, d: int, floor: int = 4096) -> int:
    """Least (q^d - 1) * q^k that is >= floor"""
    base = q**d - 1
    scale = 1
    while base * scale < floor:
        scale *= q
    return base * scale


@dataclass(frozen=True)
class SeriesBudget:
    """Per-session limits on series size and exponent denominators"""
    max_terms: Optional[int] = None
    max_denom: Optional[int] = None

    def admits(self, exponent: Fraction) -> bool:
        return self.max_denom is None or self.max_denom % Fraction(exponent).denominator == 0


UNBOUNDED = SeriesBudget()


class HahnSeries:
    """Truncated generalized power series with an absolute precision cap"""

    __slots__ = ("spec", "exps", "coeffs", "cap", "budget")

    def __init__(self, spec: FieldSpec, exps: Sequence[Fraction] = (), coeffs: Sequence[int] = (),
                 cap: Cap = INF, budget: SeriesBudget = UNBOUNDED):
        """Build from sorted, distinct exponents and nonzero galois integers"""
        cap = as_cap(cap)
        exps = tuple(Fraction(e) for e in exps)
        coeffs = tuple(int(c) for c in coeffs)
        keep = [k for k, e in enumerate(exps) if e < cap and coeffs[k] != 0]
        exps = tuple(exps[k] for k in keep)
        coeffs = tuple(coeffs[k] for k in keep)
        for e in exps:
            if not budget.admits(e):
                raise DenominatorBoundExceeded(
                    f"Exponent {e} has denominator outside max-denom {budget.max_denom}"
                )
        if budget.max_terms is not None and len(exps) > budget.max_terms:
            cap = exps[budget.max_terms]
            exps, coeffs = exps[:budget.max_terms], coeffs[:budget.max_terms]
        self.spec = spec
        self.exps = exps
        self.coeffs = coeffs
        self.cap = cap
        self.budget = budget

    # Constructors

    @classmethod
    def from_terms(cls, terms: Iterable[Tuple[Fraction, FieldElement]], cap: Cap = INF,
                   budget: SeriesBudget = UNBOUNDED, spec: FieldSpec = None) -> "HahnSeries":
        """Build from (exponent, coefficient) pairs, merging repeated exponents"""
        terms = [(Fraction(e), c) for e, c in terms]
        for _, c in terms:
            spec = c.spec if spec is None else common_spec(spec, c.spec)
        if spec is None:
            raise ValueError("from_terms needs a spec when no terms are given")
        if not terms:
            return cls(spec, cap=cap, budget=budget)
        exps = [e for e, _ in terms]
        values = [embed(c, spec).value for _, c in terms]
        return _accumulate(spec, exps, spec.gf(values), as_cap(cap), budget)

    @classmethod
    def zero(cls, spec: FieldSpec, cap: Cap = INF, budget: SeriesBudget = UNBOUNDED) -> "HahnSeries":
        return cls(spec, cap=cap, budget=budget)

    @classmethod
    def one(cls, spec: FieldSpec, budget: SeriesBudget = UNBOUNDED) -> "HahnSeries":
        return cls(spec, (Fraction(0),), (1,), INF, budget)

    @classmethod
    def monomial(cls, coeff: FieldElement, exponent, cap: Cap = INF,
                 budget: SeriesBudget = UNBOUNDED) -> "HahnSeries":
        return cls(coeff.spec, (Fraction(exponent),), (coeff.value,), cap, budget)

    @classmethod
    def constant(cls, coeff: FieldElement, budget: SeriesBudget = UNBOUNDED) -> "HahnSeries":
        return cls.monomial(coeff, 0, INF, budget)

    # Inspection

    @property
    def terms(self) -> List[Tuple[Fraction, FieldElement]]:
        return [(e, FieldElement(self.spec, c)) for e, c in zip(self.exps, self.coeffs)]

    def is_zero(self) -> bool:
        """No stored terms (zero up to the cap)"""
        return not self.exps

    def is_exact(self) -> bool:
        return self.cap == INF

    def valuation(self) -> Cap:
        return self.exps[0] if self.exps else self.cap

    def leading(self) -> Tuple[Fraction, FieldElement]:
        if not self.exps:
            raise NonUnitError("Series has no known leading term")
        return self.exps[0], FieldElement(self.spec, self.coeffs[0])

    def coefficient(self, exponent) -> FieldElement:
        exponent = Fraction(exponent)
        for e, c in zip(self.exps, self.coeffs):
            if e == exponent:
                return FieldElement(self.spec, c)
        return self.spec.zero()

    def __len__(self):
        return len(self.exps)

    # Re-embedding and truncation

    def lift(self, spec: FieldSpec) -> "HahnSeries":
        if spec.same_field(self.spec):
            if spec is self.spec:
                return self
            return HahnSeries(spec, self.exps, self.coeffs, self.cap, self.budget)
        return HahnSeries(spec, self.exps, embed_values(self.coeffs, self.spec, spec), self.cap, self.budget)

    def truncate(self, cap: Cap) -> "HahnSeries":
        return HahnSeries(self.spec, self.exps, self.coeffs, min(self.cap, as_cap(cap)), self.budget)

    def with_budget(self, budget: SeriesBudget) -> "HahnSeries":
        return HahnSeries(self.spec, self.exps, self.coeffs, self.cap, budget)

    # Ring operations

    def _align(self, other) -> Tuple["HahnSeries", "HahnSeries", FieldSpec]:
        if isinstance(other, int):
            other = FieldElement(self.spec, other % self.spec.p)
        if isinstance(other, FieldElement):
            other = HahnSeries.constant(other, self.budget)
        if not isinstance(other, HahnSeries):
            raise TypeError(f"Cannot combine HahnSeries with {type(other).__name__}")
        spec = common_spec(self.spec, other.spec)
        return self.lift(spec), other.lift(spec), spec

    def __add__(self, other) -> "HahnSeries":
        a, b, spec = self._align(other)
        GF = spec.gf
        values = np.concatenate([GF(list(a.coeffs)), GF(list(b.coeffs))]) if (a.coeffs or b.coeffs) else GF([])
        return _accumulate(spec, list(a.exps) + list(b.exps), values, min(a.cap, b.cap), self.budget)

    __radd__ = __add__

    def __neg__(self) -> "HahnSeries":
        GF = self.spec.gf
        negated = [int(c) for c in -GF(list(self.coeffs))] if self.coeffs else []
        return HahnSeries(self.spec, self.exps, negated, self.cap, self.budget)

    def __sub__(self, other) -> "HahnSeries":
        a, b, _ = self._align(other)
        return a + (-b)

    def __rsub__(self, other) -> "HahnSeries":
        return (-self) + other

    def __mul__(self, other) -> "HahnSeries":
        if isinstance(other, (int, FieldElement)):
            return self.scale(other)
        a, b, spec = self._align(other)
        cap = min(a.cap + b.valuation(), b.cap + a.valuation())
        if a.is_zero() or b.is_zero():
            return HahnSeries(spec, cap=cap, budget=self.budget)
        GF = spec.gf
        products = np.multiply.outer(GF(list(a.coeffs)), GF(list(b.coeffs))).ravel()
        exps = [ea + eb for ea in a.exps for eb in b.exps]
        return _accumulate(spec, exps, products, cap, self.budget)

    __rmul__ = __mul__

    def scale(self, c) -> "HahnSeries":
        """Multiply by a field constant"""
        if isinstance(c, int):
            c = FieldElement(self.spec, c % self.spec.p)
        if c.value == 0:
            return HahnSeries(self.spec, budget=self.budget)
        spec = common_spec(self.spec, c.spec)
        a = self.lift(spec)
        GF = spec.gf
        factor = GF(embed_values([c.value], c.spec, spec)[0])
        values = [int(v) for v in GF(list(a.coeffs)) * factor] if a.coeffs else []
        return HahnSeries(spec, a.exps, values, a.cap, self.budget)

    def shift(self, exponent) -> "HahnSeries":
        """Multiply by u^exponent"""
        exponent = Fraction(exponent)
        return HahnSeries(self.spec, [e + exponent for e in self.exps], self.coeffs,
                          self.cap + exponent, self.budget)

    def q_power(self, j: int = 1) -> "HahnSeries":
        """x -> x^(q^j): exponents and cap scale by q^j, coefficients by Frobenius"""
        if j < 0:
            raise ValueError("q_power needs j >= 0")
        factor = self.spec.q ** j
        GF = self.spec.gf
        coeffs = frobenius_array(GF(list(self.coeffs)), self.spec, j * self.spec.s) if self.coeffs else []
        cap = self.cap * factor if self.cap != INF else INF
        return HahnSeries(self.spec, [e * factor for e in self.exps], [int(c) for c in coeffs], cap, self.budget)

    def __pow__(self, n: int) -> "HahnSeries":
        if n < 0:
            return self.inv() ** (-n)
        result = HahnSeries.one(self.spec, self.budget)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def inv(self, prec: Cap = None) -> "HahnSeries":
        """Inverse by Newton iteration on the unit part; cap = cap - 2*v"""
        if self.is_zero():
            raise NonUnitError("Cannot invert a series with no stored terms")
        e0, c0 = self.leading()
        c0_inv = c0.inverse()
        if len(self.exps) == 1 and self.cap == INF:
            return HahnSeries.monomial(c0_inv, -e0, INF, self.budget)
        target = self.cap - 2 * e0 if self.cap != INF else INF
        if prec is not None:
            target = min(target, as_cap(prec))
        if target == INF:
            raise PrecisionError("Inverse of an exact series needs a target precision")
        rel = target + e0
        unit = (self.scale(c0_inv).shift(-e0)).truncate(rel)
        y = HahnSeries.one(self.spec, self.budget).truncate(rel)
        for _ in range(64):
            err = HahnSeries.one(self.spec, self.budget) - unit * y
            if err.is_zero():
                break
            y = y + y * err
        else:
            raise PrecisionError("Series inversion did not converge")
        return y.scale(c0_inv).shift(-e0).truncate(target)

    def agrees_with(self, other: "HahnSeries") -> bool:
        """Equal up to the smaller cap"""
        return (self - other).is_zero()

    # Comparison and display

    def __eq__(self, other):
        if not isinstance(other, HahnSeries):
            return NotImplemented
        try:
            a, b, _ = self._align(other)
        except Exception:
            return False
        return a.exps == b.exps and a.coeffs == b.coeffs and a.cap == b.cap

    def __hash__(self):
        return hash((self.exps, self.cap))

    def __repr__(self):
        parts = [f"{c}*u^({e})" for e, c in zip(self.exps, self.coeffs)]
        parts.append(f"O(u^{cap_to_str(self.cap)})")
        return " + ".join(parts)

    # Serialization

    def to_dict(self) -> Dict:
        return {
            "terms": [{"exp": str(e), "coeff": c.to_dict()} for e, c in self.terms],
            "cap": cap_to_str(self.cap),
        }

    @classmethod
    def from_dict(cls, data: Dict, spec: FieldSpec, budget: SeriesBudget = UNBOUNDED) -> "HahnSeries":
        terms = [(Fraction(t["exp"]), element_from_dict(t["coeff"], spec)) for t in data.get("terms", [])]
        return cls.from_terms(terms, as_cap(data.get("cap")), budget, spec=spec)


def _accumulate(spec: FieldSpec, exps: List[Fraction], values, cap: Cap, budget: SeriesBudget) -> HahnSeries:
    """Sum values sharing an exponent and keep those below cap"""
    keep = [k for k, e in enumerate(exps) if e < cap]
    if not keep:
        return HahnSeries(spec, cap=cap, budget=budget)
    uniq = sorted({exps[k] for k in keep})
    index = {e: n for n, e in enumerate(uniq)}
    GF = spec.gf
    out = GF.Zeros(len(uniq))
    np.add.at(out, np.array([index[exps[k]] for k in keep]), values[np.array(keep)])
    return HahnSeries(spec, uniq, [int(v) for v in out], cap, budget)


@dataclass(frozen=True)
class NewtonPolygon:
    """Lower convex hull of (degree, valuation) points"""
    points: Tuple[Tuple[int, Fraction], ...]
    hull: Tuple[Tuple[Fraction, int], ...]

    def root_valuations(self) -> List[Tuple[Fraction, int]]:
        """(valuation, multiplicity) of the roots, one entry per segment"""
        return [(-slope, length) for slope, length in self.hull]


def newton_polygon(points: Iterable[Tuple[int, Cap]]) -> NewtonPolygon:
    """Lower hull of the finite points; slopes negated give root valuations"""
    finite = sorted((int(x), Fraction(y)) for x, y in points if y is not None and y != INF)
    if len(finite) < 2:
        raise HypothesisError("Newton polygon needs at least two finite points")
    if len({x for x, _ in finite}) != len(finite):
        raise HypothesisError("Newton polygon points need distinct degrees")

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: List[Tuple[int, Fraction]] = []
    for pt in finite:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], pt) <= 0:
            lower.pop()
        lower.append(pt)
    hull = tuple(
        (Fraction(y2 - y1) / (x2 - x1), x2 - x1)
        for (x1, y1), (x2, y2) in zip(lower, lower[1:])
    )
    return NewtonPolygon(tuple(finite), hull)
