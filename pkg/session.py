"""
Session settings and the working context shared by every command
"""
import logging
from fractions import Fraction
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError as PydanticValidationError
from pydantic import field_validator, model_validator

from app_config import config
from exact_scalar import ExactScalar, parse_scalar
from field_tower import FieldTower, base_spec, is_irreducible
from hahn_series import Cap, HahnSeries, SeriesBudget, default_max_denom
from validators import (BRANCH_POLICIES, OUTPUT_FORMATS, InputValidator, ValidationError,
                        validate_session_settings)
from vadic_ring import PlaceData, VadicElement, expand_exact

logger = logging.getLogger(__name__)


class SessionConfig(BaseModel):
    """Validated session settings"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    p: int
    s: int = 1
    v: List[int]
    prec_t: int = config.DEFAULT_PREC_T
    prec_u: Fraction = Fraction(config.DEFAULT_PREC_U)
    max_denom: Optional[int] = None
    max_field_deg: int = config.DEFAULT_MAX_FIELD_DEG
    max_terms: int = config.DEFAULT_MAX_TERMS
    branch: str = 'max-val'
    seed: int = 0
    format: str = 'json'
    nu_max: int = config.DEFAULT_NU_MAX
    window: int = config.DIVERGENCE_WINDOW
    kernel_cap: int = config.KERNEL_SIZE_CAP

    @field_validator('v', mode='before')
    def parse_v(cls, v):
        if isinstance(v, str):
            return InputValidator.parse_coefficients(v)
        return v

    @field_validator('prec_u', mode='before')
    def parse_prec_u(cls, v):
        is_valid, message = InputValidator.validate_precision(v, 'prec_u')
        if not is_valid:
            raise ValueError(message)
        return Fraction(str(v))

    @field_validator('max_field_deg', 'max_terms', 'window', 'kernel_cap')
    def validate_positive(cls, v):
        if v < 1:
            raise ValueError('must be a positive integer')
        return v

    @field_validator('nu_max')
    def validate_nu_max(cls, v):
        if v < 0:
            raise ValueError('nu_max must be >= 0')
        return v

    @model_validator(mode='after')
    def validate_session(self):
        is_valid, errors = validate_session_settings(
            self.p, self.s, self.v, self.prec_t, self.prec_u, self.branch, self.format
        )
        if not is_valid:
            raise ValueError('; '.join(errors))
        if not is_irreducible(base_spec(self.p, self.s), self.v):
            raise ValueError('v not irreducible over F_q')
        return self

    @property
    def q(self) -> int:
        return self.p ** self.s

    @property
    def d(self) -> int:
        return len(self.v) - 1

    def to_dict(self) -> Dict:
        data = self.model_dump()
        data['prec_u'] = str(self.prec_u)
        return data


SETTING_KEYS = set(SessionConfig.model_fields) | {'q'}


def _settings_errors(error: PydanticValidationError, lines: Dict[str, int] = None) -> str:
    """Render pydantic errors as 'line N: field: message' diagnostics"""
    lines = lines or {}
    parts = []
    for item in error.errors():
        name = str(item['loc'][0]) if item['loc'] else 'settings'
        prefix = f"line {lines[name]}: " if name in lines else ''
        parts.append(f"{prefix}{name}: {item['msg']}")
    return '; '.join(parts)


def build_settings(values: Dict, lines: Dict[str, int] = None) -> SessionConfig:
    """SessionConfig from raw values; q expands to (p, s)"""
    values = {k: v for k, v in values.items() if v is not None}
    if 'q' in values:
        try:
            p, s = InputValidator.split_prime_power(int(values.pop('q')))
        except (TypeError, ValueError) as e:
            raise ValidationError(f"q: {e}")
        values.setdefault('p', p)
        values.setdefault('s', s)
        if lines and 'q' in lines:
            lines = dict(lines, p=lines['q'], s=lines['q'])
    try:
        return SessionConfig(**values)
    except PydanticValidationError as e:
        raise ValidationError(_settings_errors(e, lines))


def read_settings_file(path: str) -> Dict:
    """Parse 'key = value' lines; returns values plus a '__lines__' map"""
    values, lines = {}, {}
    try:
        with open(path, encoding='utf-8') as handle:
            content = handle.readlines()
    except OSError as e:
        raise ValidationError(f"Cannot read config {path}: {e}")
    for number, raw in enumerate(content, start=1):
        text = raw.split('#', 1)[0].strip()
        if not text:
            continue
        if '=' not in text:
            raise ValidationError(f"line {number}: expected 'key = value'")
        key, value = (part.strip() for part in text.split('=', 1))
        key = key.replace('-', '_')
        if key not in SETTING_KEYS:
            raise ValidationError(f"line {number}: unknown field {key}")
        values[key] = value
        lines[key] = number
    values['__lines__'] = lines
    return values


def load_settings(path: str = None, overrides: Dict = None) -> SessionConfig:
    """Settings from a config file (or VADIC_CONFIG) overridden by flags"""
    path = path or config.DEFAULT_CONFIG_PATH
    values, lines = {}, {}
    if path:
        values = read_settings_file(path)
        lines = values.pop('__lines__')
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
            lines.pop(key, None)
    return build_settings(values, lines)


class Session:
    """Working field, place and series budget for one run"""

    def __init__(self, settings: SessionConfig):
        self.settings = settings
        self.tower = FieldTower(settings.p, settings.s, settings.max_field_deg)
        self.place = PlaceData.build(self.tower, settings.v)
        max_denom = settings.max_denom or default_max_denom(settings.q, settings.d, config.DEFAULT_DENOM_FLOOR)
        self.budget = SeriesBudget(settings.max_terms, max_denom)
        self.rng = np.random.default_rng(settings.seed)
        logger.debug(f"Session q={settings.q} v={settings.v} max_denom={max_denom}")

    @classmethod
    def create(cls, **values) -> "Session":
        return cls(build_settings(values))

    @property
    def q(self) -> int:
        return self.tower.q

    @property
    def d(self) -> int:
        return self.place.d

    @property
    def spec(self):
        return self.tower.current

    @property
    def base(self):
        return self.tower.base

    @property
    def n_t(self) -> int:
        return self.settings.prec_t

    @property
    def prec_u(self) -> Fraction:
        return self.settings.prec_u

    def scalar(self, text) -> ExactScalar:
        if isinstance(text, ExactScalar):
            return text
        if isinstance(text, int):
            return ExactScalar.from_int(self.base, text)
        return parse_scalar(text, self.base)

    def t_minus_theta(self, power: int = 1) -> ExactScalar:
        return ExactScalar.t_minus_theta(self.base, power)

    def expand(self, x, n_t: int = None, prec_u: Cap = None) -> VadicElement:
        """Expansion of an exact scalar at the session place"""
        return expand_exact(self.scalar(x), self.place, n_t or self.n_t,
                            prec_u if prec_u is not None else self.prec_u, self.budget)

    def theta_series(self, k: int = 0) -> HahnSeries:
        """theta^(q^k) = lambda_0^(q^k) + u^(q^k) as an exact series"""
        lam = self.place.reference
        head = HahnSeries.constant(lam, self.budget)
        for _ in range(k):
            head = head.q_power(1)
        return head + HahnSeries.monomial(self.spec.one(), self.q ** k, budget=self.budget)

    def one(self) -> VadicElement:
        return VadicElement.one(self.place, self.spec, self.n_t, self.budget)

    def zero(self) -> VadicElement:
        return VadicElement.zero(self.place, self.spec, self.n_t, self.budget)
