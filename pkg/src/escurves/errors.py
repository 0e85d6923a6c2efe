"""Exception hierarchy shared by every module."""


class EsCurvesError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(EsCurvesError, ValueError):
    """Argument outside the mathematical domain of the operation."""


class PreconditionError(EsCurvesError, ValueError):
    """A documented precondition of an operation does not hold."""


class ValidationError(EsCurvesError, ValueError):
    """Candidate data fails an exact equation it claims to satisfy."""


class StructureError(EsCurvesError, ValueError):
    """Input is on the curve but lacks a structure the reduction needs."""


class DegenerateTermError(EsCurvesError, ValueError):
    """A term of the arithmetic progression vanishes."""

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"term {index} of the progression is zero")


class AuditError(EsCurvesError, ValueError):
    """Term data handed to an audit is internally inconsistent."""


class ResourceError(EsCurvesError, RuntimeError):
    """Requested computation exceeds the supported size."""


class InputError(EsCurvesError, ValueError):
    """A candidate or config file cannot be parsed."""

    def __init__(self, message, field=None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)
