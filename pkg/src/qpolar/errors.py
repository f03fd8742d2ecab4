"""Exception hierarchy.

Three families map onto the CLI exit codes: bad input (1), a violated
mathematical precondition (2) and a failed internal verification (3).
"""


class QPolarError(Exception):
    """Base class for every error raised by the package."""

    exit_code = 3


class InputError(QPolarError, ValueError):
    """Malformed input: wrong shape, parity, index or schema."""

    exit_code = 1


class DimensionOdd(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class NotSymmetric(InputError):
    pass


class IndexOutOfRange(InputError):
    pass


class PreconditionError(QPolarError, ValueError):
    """The input is well formed but outside the domain of the operation."""

    exit_code = 2


class NotPositiveDefinite(PreconditionError):
    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class NegativeSpectrum(PreconditionError):
    pass


class NotDiagonalizable(PreconditionError):
    pass


class SingularL(PreconditionError):
    pass


class PhaseSpaceBody(PreconditionError):
    pass


class SpaceMismatch(PreconditionError):
    pass


class UnsupportedBody(PreconditionError):
    pass


class DegenerateBox(PreconditionError):
    pass


class QuantumConditionViolated(PreconditionError):
    pass


class NotPure(PreconditionError):
    pass


class SubHeisenberg(PreconditionError):
    pass


class NotQuantumPair(PreconditionError):
    pass


class VerificationFailed(QPolarError, ArithmeticError):
    """A computed result failed its own post-check."""

    exit_code = 3

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ResidualTooLarge(VerificationFailed):
    pass


class NotSymplectic(VerificationFailed):
    pass


class ExpOverflow(PreconditionError, OverflowError):
    pass
