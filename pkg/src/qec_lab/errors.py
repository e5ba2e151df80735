"""Exception hierarchy.

Every error raised on a contract violation derives from :class:`QecLabError`;
the value-type errors also derive from :class:`ValueError` so callers that
only care about bad input can catch that.
"""


class QecLabError(Exception):
    """Base class for all package errors."""


class InvalidDimension(QecLabError, ValueError):
    pass


class InvalidResidue(QecLabError, ValueError):
    pass


class ContractViolation(QecLabError, ValueError):
    pass


class TruncationTooSmall(QecLabError, ValueError):
    pass


class InvalidCode(QecLabError, ValueError):
    pass


class InvalidRate(QecLabError, ValueError):
    pass


class NotAChannel(QecLabError, ValueError):
    pass


class StructureViolation(QecLabError, ValueError):
    pass


class InvalidConfig(QecLabError, ValueError):
    pass


class InvalidLattice(QecLabError, ValueError):
    pass


class ConvergenceFailure(QecLabError, RuntimeError):
    """An iterative solver hit its iteration cap; ``residuals`` holds diagnostics."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals
