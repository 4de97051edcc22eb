"""
Exact elements of F_q(theta)(t): quotients of polynomials in t and theta

Coefficients are galois integers of the base field F_q. Quotients are not
reduced; equality is decided by cross-multiplication.
"""
import logging
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import sympy
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

from errors import PoleAtPlaceError
from field_tower import (FieldElement, FieldSpec, binomial_mod, common_spec, embed,
                         embed_values, int_to_digits)
from hahn_series import INF, Cap, HahnSeries, SeriesBudget, UNBOUNDED
from validators import ValidationError

logger = logging.getLogger(__name__)

Poly2 = Dict[Tuple[int, int], int]
Tail = Optional[Tuple[Fraction, Cap]]


def _clean(poly: Poly2) -> Poly2:
    return {key: c for key, c in poly.items() if c}


def _padd(a: Poly2, b: Poly2, GF) -> Poly2:
    out = dict(a)
    for key, c in b.items():
        out[key] = int(GF(out.get(key, 0)) + GF(c))
    return _clean(out)


def _pneg(a: Poly2, GF) -> Poly2:
    return {key: int(-GF(c)) for key, c in a.items()}


def _pscale(a: Poly2, c: int, GF) -> Poly2:
    return _clean({key: int(GF(v) * GF(c)) for key, v in a.items()})


def _pmul(a: Poly2, b: Poly2, GF) -> Poly2:
    out: Dict[Tuple[int, int], object] = {}
    for (i1, j1), c1 in a.items():
        for (i2, j2), c2 in b.items():
            key = (i1 + i2, j1 + j2)
            out[key] = out.get(key, GF(0)) + GF(c1) * GF(c2)
    return _clean({key: int(v) for key, v in out.items()})


class ExactScalar:
    """num/den with num, den polynomials in (t, theta) over F_q"""

    __slots__ = ("base", "num", "den")

    def __init__(self, base: FieldSpec, num: Poly2, den: Poly2 = None):
        num = _clean(dict(num))
        den = _clean(dict(den)) if den is not None else {(0, 0): 1}
        if not den:
            raise ZeroDivisionError("ExactScalar with zero denominator")
        GF = base.gf
        if not num:
            den = {(0, 0): 1}
        else:
            lead = den[max(den)]
            if lead != 1:
                inv = int(GF(lead) ** -1)
                num, den = _pscale(num, inv, GF), _pscale(den, inv, GF)
        self.base = base
        self.num = num
        self.den = den

    # Constructors

    @classmethod
    def constant(cls, base: FieldSpec, value: int) -> "ExactScalar":
        return cls(base, {(0, 0): int(value)})

    @classmethod
    def from_int(cls, base: FieldSpec, n: int) -> "ExactScalar":
        return cls.constant(base, n % base.p)

    @classmethod
    def t(cls, base: FieldSpec) -> "ExactScalar":
        return cls(base, {(1, 0): 1})

    @classmethod
    def theta(cls, base: FieldSpec) -> "ExactScalar":
        return cls(base, {(0, 1): 1})

    @classmethod
    def t_minus_theta(cls, base: FieldSpec, power: int = 1) -> "ExactScalar":
        return (cls.t(base) - cls.theta(base)) ** power

    # Predicates

    def is_zero(self) -> bool:
        return not self.num

    def is_polynomial(self) -> bool:
        return list(self.den) == [(0, 0)]

    def is_theta_free(self) -> bool:
        return all(j == 0 for _, j in self.num) and all(j == 0 for _, j in self.den)

    def is_t_free(self) -> bool:
        return all(i == 0 for i, _ in self.num) and all(i == 0 for i, _ in self.den)

    def t_degree(self) -> int:
        return max((i for i, _ in self.num), default=0)

    # Arithmetic

    def _coerce(self, other) -> "ExactScalar":
        if isinstance(other, int):
            return ExactScalar.from_int(self.base, other)
        if not isinstance(other, ExactScalar):
            raise TypeError(f"Cannot combine ExactScalar with {type(other).__name__}")
        return other

    def __add__(self, other) -> "ExactScalar":
        other = self._coerce(other)
        GF = self.base.gf
        if self.den == other.den:
            return ExactScalar(self.base, _padd(self.num, other.num, GF), self.den)
        num = _padd(_pmul(self.num, other.den, GF), _pmul(other.num, self.den, GF), GF)
        return ExactScalar(self.base, num, _pmul(self.den, other.den, GF))

    __radd__ = __add__

    def __neg__(self) -> "ExactScalar":
        return ExactScalar(self.base, _pneg(self.num, self.base.gf), self.den)

    def __sub__(self, other) -> "ExactScalar":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "ExactScalar":
        return self._coerce(other) - self

    def __mul__(self, other) -> "ExactScalar":
        other = self._coerce(other)
        GF = self.base.gf
        return ExactScalar(self.base, _pmul(self.num, other.num, GF), _pmul(self.den, other.den, GF))

    __rmul__ = __mul__

    def inverse(self) -> "ExactScalar":
        if self.is_zero():
            raise ZeroDivisionError("ExactScalar zero has no inverse")
        return ExactScalar(self.base, self.den, self.num)

    def __truediv__(self, other) -> "ExactScalar":
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other) -> "ExactScalar":
        return self._coerce(other) * self.inverse()

    def __pow__(self, n: int) -> "ExactScalar":
        if n < 0:
            return self.inverse() ** (-n)
        result = ExactScalar.constant(self.base, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def sigma(self, j: int = 1) -> "ExactScalar":
        """q^j-power on theta and on coefficients, t fixed"""
        factor = self.base.q ** j

        def twist(poly):
            return {(i, k * factor): c for (i, k), c in poly.items()}

        return ExactScalar(self.base, twist(self.num), twist(self.den))

    def __eq__(self, other):
        if isinstance(other, int):
            other = ExactScalar.from_int(self.base, other)
        if not isinstance(other, ExactScalar):
            return NotImplemented
        GF = self.base.gf
        return _pmul(self.num, other.den, GF) == _pmul(other.num, self.den, GF)

    __hash__ = None

    # Expansion at a place

    def theta_valuation(self, lam_theta: FieldElement) -> Fraction:
        """u-adic valuation at theta = lam_theta + u of a t-free scalar"""
        if not self.is_t_free():
            raise ValueError("theta_valuation needs a t-free scalar")
        if self.is_zero():
            return INF
        num = _taylor(self.num, self.base, lam_theta, lam_theta, 1, UNBOUNDED)[0]
        den = _taylor(self.den, self.base, lam_theta, lam_theta, 1, UNBOUNDED)[0]
        return num.valuation() - den.valuation()

    def expand_at(self, lam_t: FieldElement, lam_theta: FieldElement, n_t: int, prec_u: Cap,
                  budget: SeriesBudget = UNBOUNDED) -> Tuple[List[HahnSeries], Tail]:
        """Coefficients of (t - lam_t)^k, k < n_t, at theta = lam_theta + u, with a tail bound"""
        num = _taylor(self.num, self.base, lam_t, lam_theta, n_t, budget)
        den = _taylor(self.den, self.base, lam_t, lam_theta, n_t, budget)
        if self.is_polynomial():
            tail = (Fraction(0), INF) if self.t_degree() < n_t else (Fraction(0), Fraction(0))
            return num, tail
        d0 = den[0]
        if d0.is_zero():
            raise PoleAtPlaceError(f"Denominator of {self} vanishes at t = {lam_t.value}")
        w = d0.valuation()
        d0_inv = d0.inv(Fraction(prec_u) + n_t * w)
        coeffs: List[HahnSeries] = []
        for k in range(n_t):
            acc = num[k]
            for j in range(1, k + 1):
                if not den[j].is_zero():
                    acc = acc - den[j] * coeffs[k - j]
            term = acc * d0_inv
            coeffs.append(term if term.is_exact() else term.truncate(prec_u))
        return coeffs, (-w, -w)

    # Text form

    def __str__(self):
        num = _render(self.num, self.base)
        if self.is_polynomial() and self.den[(0, 0)] == 1:
            return num
        return f"({num})/({_render(self.den, self.base)})"

    def __repr__(self):
        return f"ExactScalar({self})"

    def to_dict(self) -> str:
        return str(self)


def _taylor(poly: Poly2, base: FieldSpec, lam_t: FieldElement, lam_theta: FieldElement,
            n_t: int, budget: SeriesBudget) -> List[HahnSeries]:
    """Exact coefficients of (t - lam_t)^k as polynomials in u = theta - lam_theta"""
    spec = common_spec(lam_t.spec, lam_theta.spec)
    GF = spec.gf
    p = spec.p
    lt = GF(embed(lam_t, spec).value)
    lth = GF(embed(lam_theta, spec).value)
    keys = list(poly)
    values = embed_values([poly[key] for key in keys], base, spec)
    acc: List[Dict[int, object]] = [dict() for _ in range(n_t)]
    for (i, j), c in zip(keys, values):
        c = GF(c)
        for k in range(min(i, n_t - 1) + 1):
            bk = binomial_mod(i, k, p)
            if not bk:
                continue
            head = c * bk * lt ** (i - k)
            if head == 0:
                continue
            for m in range(j + 1):
                bm = binomial_mod(j, m, p)
                if not bm:
                    continue
                acc[k][m] = acc[k].get(m, GF(0)) + head * bm * lth ** (j - m)
    series = []
    for row in acc:
        exps = sorted(row)
        series.append(HahnSeries(spec, [Fraction(m) for m in exps], [int(row[m]) for m in exps], INF, budget))
    return series


def _render(poly: Poly2, base: FieldSpec) -> str:
    """Deterministic text: one monomial per nonzero F_p digit of each coefficient"""
    parts = []
    for (i, j) in sorted(poly, reverse=True):
        for k, digit in enumerate(int_to_digits(poly[(i, j)], base.p, base.s)):
            if not digit:
                continue
            factors = [str(digit)] if digit != 1 else []
            if k:
                factors.append("g" if k == 1 else f"g^{k}")
            if i:
                factors.append("t" if i == 1 else f"t^{i}")
            if j:
                factors.append("theta" if j == 1 else f"theta^{j}")
            parts.append("*".join(factors) or "1")
    return " + ".join(parts) or "0"


_T, _THETA, _G = sympy.symbols("t theta g")
_TRANSFORMS = standard_transformations + (convert_xor,)


def parse_scalar(text: str, base: FieldSpec) -> ExactScalar:
    """Parse an expression in t, theta and g (generator of F_q) such as '1/(theta+1)'"""
    if text is None or not str(text).strip():
        raise ValidationError("Empty scalar expression")
    source = str(text).replace("θ", "theta")
    try:
        expr = parse_expr(source, local_dict={"t": _T, "theta": _THETA, "g": _G},
                          transformations=_TRANSFORMS, evaluate=True)
    except (SyntaxError, TypeError, sympy.SympifyError) as e:
        raise ValidationError(f"Cannot parse scalar {text!r}: {e}")
    extra = expr.free_symbols - {_T, _THETA, _G}
    if extra:
        raise ValidationError(f"Unknown symbols in {text!r}: {sorted(str(s) for s in extra)}")
    num_expr, den_expr = sympy.fraction(sympy.together(expr))
    num = _to_poly2(num_expr, base, text)
    den = _to_poly2(den_expr, base, text)
    if not den:
        raise ValidationError(f"Scalar {text!r} has a zero denominator modulo {base.p}")
    return ExactScalar(base, num, den)


def _to_poly2(expr, base: FieldSpec, text: str) -> Poly2:
    try:
        poly = sympy.Poly(sympy.expand(expr), _T, _THETA, _G)
    except sympy.PolynomialError as e:
        raise ValidationError(f"Scalar {text!r} is not a rational function: {e}")
    GF = base.gf
    p = base.p
    g = GF(p) if base.degree > 1 else None
    out: Dict[Tuple[int, int], object] = {}
    for (i, j, k), coeff in poly.terms():
        coeff = sympy.Rational(coeff)
        if coeff.q % p == 0:
            raise ValidationError(f"Scalar {text!r} divides by a multiple of p = {p}")
        value = GF(int(coeff.p) % p) * GF(pow(int(coeff.q), -1, p))
        if k:
            if g is None:
                raise ValidationError("Symbol g needs a non-prime base field")
            value = value * g ** k
        out[(i, j)] = out.get((i, j), GF(0)) + value
    return _clean({key: int(v) for key, v in out.items()})
