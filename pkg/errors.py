"""
Exception hierarchy for the v-adic period library
"""


class VadicError(Exception):
    """Base error for all library failures"""
    pass


class FieldDegreeExceeded(VadicError):
    """Working field would exceed max-field-deg"""
    pass


class NotInField(VadicError):
    """Requested root does not exist in the current working field"""
    pass


class EmbeddingError(VadicError):
    """Subfield degree does not divide the target degree"""
    pass


class DenominatorBoundExceeded(VadicError):
    """An exponent denominator does not divide max-denom"""
    pass


class NonUnitError(VadicError):
    """Inversion of a zero series or one with unknown leading term"""
    pass


class PrecisionError(VadicError):
    """Precision exhausted, unreachable, or short of a requested cutoff"""
    pass


class DivergenceError(VadicError):
    """Evaluation term valuations stopped increasing"""
    pass


class PoleAtPlaceError(VadicError):
    """Exact scalar has a pole at one of the places"""
    pass


class ShapeMismatchError(VadicError):
    """Matrix shapes do not match"""
    pass


class SingularMatrixError(VadicError):
    """Exact or truncated matrix is not invertible"""
    pass


class NotSigmaFixedError(VadicError):
    """Matrix used as a Galois point is not sigma-fixed"""
    pass


class HypothesisError(VadicError):
    """Input violates an algorithm hypothesis (rank, field size, b0 = 1, ...)"""
    pass


class SizeCapExceeded(VadicError):
    """Linear system larger than the configured cap"""
    pass
