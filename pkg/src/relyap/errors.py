"""Exception hierarchy shared by the library and the CLI."""


class RelyapError(Exception):
    """Base class for all library errors."""


class InvalidArgument(RelyapError, ValueError):
    pass


class CoverageError(RelyapError):
    """A trajectory was queried outside the time span it was integrated on."""


class SolverFailure(RelyapError):
    pass


class AssemblyFailure(RelyapError):
    """``I - U2`` is singular or too ill-conditioned to solve with."""

    def __init__(self, message, rcond=None):
        super().__init__(message)
        self.rcond = rcond


class NumericFailure(RelyapError):
    pass
