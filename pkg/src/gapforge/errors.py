"""Exception types shared across gapforge."""


class GapforgeError(Exception):
    """Base class for all errors raised by gapforge."""


class EmptyRangeError(GapforgeError, ValueError):
    """An index or value range contains nothing to process."""


class DomainError(GapforgeError, ValueError):
    """An argument lies outside the domain of an operation."""


class PositivityError(DomainError):
    """A sequence that must be positive produced a value <= 0."""

    def __init__(self, n: int, value=None, what: str = "q"):
        self.n = n
        self.value = value
        msg = f"{what}_{n} is not positive"
        if value is not None:
            msg += f" (value {value})"
        super().__init__(msg)


class ParseError(GapforgeError, ValueError):
    """Syntax error in a sequence expression; ``position`` is a 0-based offset."""

    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class BitBudgetExceeded(GapforgeError):
    """Exact rational iteration outgrew its configured bit budget."""
