"""Exception hierarchy shared by every module.

Each class carries the CLI exit code it maps to, so the front end never has
to keep its own translation table in sync.
"""


class MumleError(Exception):
    exit_code = 1


class UsageError(MumleError):
    """Bad configuration, flags or input layout."""

    exit_code = 2


class DataShapeError(UsageError):
    """Wrong number of observations, ragged groups, empty input."""


class DomainError(MumleError):
    exit_code = 3


class ParameterDomainError(DomainError):
    pass


class SupportError(DomainError):
    """An observation lies outside the support implied by the parameters."""


class MomentDomainError(DomainError):
    """Requested moment is infinite or undefined for the given sample size."""


class DegenerateSampleError(MumleError):
    """The updated statistic is zero (all observations equal)."""

    exit_code = 4


class UnsupportedOperationError(MumleError):
    exit_code = 5


class NumericError(MumleError):
    exit_code = 6


class BracketingError(NumericError):
    pass


class ConvergenceError(NumericError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class SingularInformationError(NumericError):
    pass


class ExperimentIntegrityError(MumleError):
    exit_code = 7
