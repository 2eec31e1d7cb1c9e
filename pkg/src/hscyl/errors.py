"""Exception taxonomy shared by every module.

Two broad families matter to callers: domain errors (bad inputs, shell exit
code 2) and convergence errors (a numerical routine ran out of budget, exit
code 3).  Usage errors are raised only by the command-line layer (exit 1).
"""


class HscylError(Exception):
    """Base class for all package errors."""


class DomainError(HscylError):
    """Input lies outside the mathematical domain of an operation."""


class ParameterDomainError(DomainError):
    """A parameter violates its stated range (e.g. p outside (1, n))."""


class ConvergenceDomainError(DomainError):
    """A closed-form integral diverges for these parameters."""


class SingularityError(DomainError):
    """Evaluation requested exactly on a singular point."""


class FitDomainError(DomainError):
    """Samples are unusable for a decay fit (span, sign, or inconclusive)."""


class GridError(DomainError):
    """Grid is unusable: too few nodes, degenerate ranges, ball off-grid."""


class InternalConsistencyError(DomainError):
    """Two quantities that must agree by construction do not."""


class ConvergenceError(HscylError):
    """An iterative routine exhausted its budget before meeting tolerance.

    ``partial`` carries the best value or result obtained before failing.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class UsageError(HscylError):
    """Malformed command line or configuration file."""
