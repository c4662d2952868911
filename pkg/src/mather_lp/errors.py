"""Exception hierarchy shared by every module of the package."""


class MatherLPError(Exception):
    """Base class for all package errors."""


class InvalidArgument(MatherLPError, ValueError):
    """Inputs violate a documented precondition (shape, range, parity...)."""


class SolverError(MatherLPError):
    """A linear program ended in a non-optimal status.

    The status string is kept so callers (and the CLI exit code) can report it.
    """

    def __init__(self, status, message=None):
        self.status = status
        super().__init__(message or f"linear program status: {status}")


class TruncationError(SolverError):
    """Optimal support keeps touching the velocity cutoff after escalation."""

    def __init__(self, message):
        super().__init__("truncation", message)


class RangeError(SolverError):
    """A requested rotation vector is not reachable on the velocity grid."""

    def __init__(self, message):
        super().__init__("infeasible", message)


class UnsupportedSpec(MatherLPError):
    pass


class InstanceTooLarge(MatherLPError):
    pass
