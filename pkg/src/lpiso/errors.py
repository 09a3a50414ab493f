"""Exception types raised across the package."""


class LpisoError(Exception):
    """Base class for all package errors."""


class NegativeBase(LpisoError, ValueError):
    """A real power or root was requested of an interval reaching below zero."""


class SpaceMismatch(LpisoError, ValueError):
    """Two vectors from different spaces (or exponents) were combined."""


class UnsupportedSpace(LpisoError, ValueError):
    pass


class ValidationMissing(LpisoError):
    """A tree was used before a passing separating/summative validation."""


class UnknownChainLimit(LpisoError):
    """A chain limit is needed but its verdict is still unknown at this depth."""


class AtomCountMismatch(LpisoError):
    pass


class PrecisionExhausted(LpisoError):
    pass


class GridTooSmall(LpisoError, ValueError):
    pass


class BudgetExhausted(LpisoError):
    """Raised by searches run with ``strict_budget``; carries partial results."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class LoopDetected(LpisoError, ValueError):
    pass


class NotIsomorphism(LpisoError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class FormatError(LpisoError, ValueError):
    """Malformed text input (vector literal, presentation, table, graph...)."""
