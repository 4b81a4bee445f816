"""Exception hierarchy.

Every error raised by the library derives from :class:`FlowError`.  The CLI
maps the three families below onto exit codes 2, 3 and 4.
"""


class FlowError(Exception):
    """Base class for all library errors."""


class ValidationError(FlowError, ValueError):
    """Bad user input (flow document, knob out of range, ...)."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class DomainError(ValidationError):
    """Operation undefined for this flow (e.g. N <= 1 where N >= 2 is needed)."""


class PreconditionError(ValidationError):
    """A documented precondition of an operation does not hold."""


class CapabilityError(ValidationError):
    """Requested order / feature beyond what is implemented."""


class OutOfCensusError(ValidationError):
    """Counting function queried beyond the enumerated weight cutoff."""


class SolverError(FlowError, RuntimeError):
    """Iterative solver failed to converge."""

    def __init__(self, message, **context):
        super().__init__(message)
        self.context = context


class ResourceError(FlowError, RuntimeError):
    """Work estimate exceeds a configured cap."""


class AccuracyError(SolverError):
    """Too many refinement candidates diverged."""


class NumericIntegrityError(FlowError, ArithmeticError):
    """A computed quantity violates a proved inequality beyond its slack."""
