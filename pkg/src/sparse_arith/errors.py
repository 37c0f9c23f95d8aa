"""Exception hierarchy shared by every module.

Domain errors derive from :class:`SparseArithError`; the CLI maps them to
exit code 1.
"""


class SparseArithError(Exception):
    """Base class for all domain errors raised by this package."""


class NotStrictlyIncreasing(SparseArithError, ValueError):
    pass


class IndexBeyondHorizon(SparseArithError, IndexError):
    pass


class NegativeIndexUnderflow(SparseArithError, IndexError):
    pass


class WindowTooSmall(SparseArithError):
    pass


class PreconditionViolated(SparseArithError):
    pass


class NotBoundedInRange(SparseArithError):
    pass


class UnboundVariable(SparseArithError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class AmbientMismatch(SparseArithError):
    pass


class UndecidableOnWindow(SparseArithError):
    pass


class ZeroHasNoCoset(SparseArithError, ValueError):
    pass


class UniqueMinimum(SparseArithError):
    pass


class NoDominant(SparseArithError):
    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class SizeBudgetExceeded(SparseArithError):
    pass


class SeparationError(SparseArithError):
    """Raised when concrete data does not fit any branch of a separation step."""


class NotMonotone(SeparationError):
    pass


class WindowExhausted(SeparationError):
    pass


class AmbiguousCase(SeparationError):
    pass


class DivisionByZero(SeparationError, ZeroDivisionError):
    pass


class InsufficientData(SparseArithError, ValueError):
    pass


class TermSyntaxError(SparseArithError, ValueError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifier(SparseArithError, ValueError):
    def __init__(self, name, offset=None):
        where = "" if offset is None else f" at offset {offset}"
        super().__init__(f"unknown identifier {name!r}{where}")
        self.name = name
        self.offset = offset
