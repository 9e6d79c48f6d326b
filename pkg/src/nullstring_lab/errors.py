"""Exception hierarchy shared by all modules."""


class NullStringLabError(Exception):
    """Base class for every error raised by the package."""


class SingularPoint(NullStringLabError):
    """Evaluation hit a pole or branch point; the caller should resample."""

    def __init__(self, message, span=None):
        super().__init__(message)
        self.span = span


class DivisionNearZero(SingularPoint):
    pass


class LogOfZero(SingularPoint):
    pass


class LogDomainError(SingularPoint):
    """Logarithm of a negative number requested in real mode."""


class NonFiniteValue(SingularPoint):
    """Evaluation overflowed to inf or nan."""


class SingularSampling(SingularPoint):
    """A finite-difference stencil would straddle a singular locus."""


class ParseError(NullStringLabError, ValueError):
    """DSL parse failure carrying the byte offset and span of the culprit."""

    def __init__(self, message, offset=0, end=None):
        self.offset = offset
        self.end = offset if end is None else end
        super().__init__(f"{message} (at byte {offset})")
        self.reason = message


class DSLSyntaxError(ParseError):
    pass


class NonIntegerExponent(ParseError):
    pass


class UnknownFunction(ParseError):
    pass


class UnboundSlot(NullStringLabError, KeyError):
    pass


class ArityViolation(NullStringLabError, ValueError):
    pass


class DegenerateMetric(NullStringLabError):
    pass


class IllConditioned(NullStringLabError):
    """Root clustering or a sign test sits inside the tolerance band."""


class InconsistentOptics(NullStringLabError):
    pass


class ZeroSpinor(NullStringLabError):
    pass


class BothLeadingZero(NullStringLabError):
    pass


class ImplicitSolveFailed(SingularPoint):
    pass


class MetricFileError(NullStringLabError, ValueError):
    pass
