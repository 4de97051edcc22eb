import re
from fractions import Fraction
from typing import List, Tuple

import galois
import logging

logger = logging.getLogger(__name__)

BRANCH_POLICIES = ('max-val', 'min-val', 'enumerate')
OUTPUT_FORMATS = ('json', 'table')


class ValidationError(Exception):
    """Custom validation error"""
    pass


class InputValidator:
    """Input validation for session settings and command-line values"""

    @staticmethod
    def validate_prime(p: int) -> Tuple[bool, str]:
        """Validate the characteristic"""
        if not isinstance(p, int) or p < 2:
            return False, "p must be an integer >= 2"
        if not galois.is_prime(p):
            return False, f"p = {p} is not prime"
        return True, "Valid prime"

    @staticmethod
    def split_prime_power(q: int) -> Tuple[int, int]:
        """Return (p, s) with q = p^s"""
        if not isinstance(q, int) or q < 2 or not galois.is_prime_power(q):
            raise ValidationError(f"q = {q} is not a prime power")
        p = galois.factors(q)[0][0]
        s = 0
        while q > 1:
            q //= p
            s += 1
        return int(p), s

    @staticmethod
    def parse_coefficients(text: str) -> List[int]:
        """Parse a little-endian coefficient list such as '1,0,1'"""
        if text is None or not str(text).strip():
            raise ValidationError("Coefficient list is empty")
        parts = [part.strip() for part in str(text).strip().strip('[]').split(',')]
        if not all(re.fullmatch(r'\d+', part) for part in parts):
            raise ValidationError(f"Invalid coefficient list: {text!r}")
        return [int(part) for part in parts]

    @staticmethod
    def validate_polynomial(coeffs: List[int], q: int) -> Tuple[bool, str]:
        """Validate a monic little-endian polynomial over F_q"""
        if len(coeffs) < 2:
            return False, "Polynomial must have degree >= 1"
        if any(c < 0 or c >= q for c in coeffs):
            return False, f"Coefficients must lie in 0..{q - 1}"
        if coeffs[-1] != 1:
            return False, "Polynomial must be monic"
        return True, "Valid polynomial"

    @staticmethod
    def validate_precision(value, name: str) -> Tuple[bool, str]:
        """Validate a positive precision value"""
        try:
            number = Fraction(str(value))
        except (ValueError, ZeroDivisionError):
            return False, f"{name} is not a rational number"
        if number <= 0:
            return False, f"{name} must be positive"
        return True, "Valid precision"

    @staticmethod
    def parse_rational(text: str) -> Fraction:
        """Parse '3/2', '-1' or '0.75'"""
        try:
            return Fraction(str(text).strip())
        except (ValueError, ZeroDivisionError):
            raise ValidationError(f"Invalid rational number: {text!r}")

    @staticmethod
    def validate_branch(branch: str) -> Tuple[bool, str]:
        """Validate a branch policy"""
        if branch not in BRANCH_POLICIES:
            return False, f"Branch must be one of {', '.join(BRANCH_POLICIES)}"
        return True, "Valid branch"

    @staticmethod
    def validate_format(fmt: str) -> Tuple[bool, str]:
        """Validate the output format"""
        if fmt not in OUTPUT_FORMATS:
            return False, f"Format must be one of {', '.join(OUTPUT_FORMATS)}"
        return True, "Valid format"


def validate_session_settings(p: int, s: int, v: List[int], prec_t: int, prec_u,
                              branch: str, fmt: str) -> Tuple[bool, List[str]]:
    """Validate a complete set of session settings"""
    errors = []

    # Validate characteristic
    is_valid, message = InputValidator.validate_prime(p)
    if not is_valid:
        errors.append(message)

    if not isinstance(s, int) or s < 1:
        errors.append("s must be a positive integer")

    # Validate place polynomial
    if not errors:
        is_valid, message = InputValidator.validate_polynomial(v, p ** s)
        if not is_valid:
            errors.append(f"v: {message}")

    # Validate precisions
    if not isinstance(prec_t, int) or prec_t < 1:
        errors.append("prec_t must be a positive integer")
    is_valid, message = InputValidator.validate_precision(prec_u, "prec_u")
    if not is_valid:
        errors.append(message)

    # Validate policies
    for result in (InputValidator.validate_branch(branch), InputValidator.validate_format(fmt)):
        if not result[0]:
            errors.append(result[1])

    return len(errors) == 0, errors
