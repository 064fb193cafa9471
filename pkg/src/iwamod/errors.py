"""Exception types shared across the package."""


class IwamodError(Exception):
    """Base class for all library errors."""


class ContextMismatch(IwamodError, ValueError):
    """Operands live in different ring contexts."""


class NotInvertible(IwamodError, ArithmeticError):
    """Element is not a unit at the working precision."""


class PrecisionError(IwamodError, ArithmeticError):
    """Result cannot be decided at the declared (p-adic or T-adic) precision."""


class TruncationTooShort(PrecisionError):
    pass


class IndeterminateAtPrecision(PrecisionError):
    pass


class ExhaustedRange(IwamodError):
    """No admissible parameter was found in the searched range."""

    def __init__(self, message, checked=()):
        super().__init__(message)
        self.checked = tuple(checked)


class PreconditionError(IwamodError, ValueError):
    """Input violates an operation precondition; ``detail`` says which."""

    def __init__(self, message, **detail):
        super().__init__(message)
        self.detail = detail


class PoleAlongPrime(IwamodError, ArithmeticError):
    """A pairing denominator is not coprime to the augmentation ideal of the level."""
