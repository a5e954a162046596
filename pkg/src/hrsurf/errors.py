"""Exception hierarchy shared by every module."""


class HrSurfError(Exception):
    """Base class for all errors raised by hrsurf."""


class DomainError(HrSurfError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class RangeError(DomainError):
    """Integer order (r) outside its admissible range."""


class ValidationError(HrSurfError, ValueError):
    """Malformed input, e.g. a non-symmetric matrix or bad grid."""


class GridSizeError(ValidationError):
    pass


class ClassificationError(HrSurfError):
    """Operation requested for the wrong family (entire vs compact)."""


class NumericalFailure(HrSurfError):
    """A tolerance could not be met."""


class SingularDomainError(DomainError):
    """Profile recovery hit a vanishing denominator."""

    def __init__(self, message, last_valid=None):
        super().__init__(message)
        self.last_valid = last_valid


class DomainExhaustedError(DomainError):
    """Profile curve left its existence region (negative slope squared)."""

    def __init__(self, message, last_valid=None):
        super().__init__(message)
        self.last_valid = last_valid
