"""Exception hierarchy shared by all modules."""


class ComputableError(Exception):
    """Base class for every error raised by compreal."""


class ParseError(ComputableError, ValueError):
    """Malformed text input; carries a position when one is known."""

    def __init__(self, message, pos=None, line=None, col=None):
        self.pos = pos
        self.line = line
        self.col = col
        where = ""
        if line is not None:
            where = f" (line {line}, column {col})"
        elif pos is not None:
            where = f" (at offset {pos})"
        super().__init__(message + where)


class ExponentOverflow(ComputableError, OverflowError):
    pass


class PrecisionOverflow(ComputableError, OverflowError):
    pass


class DivisionByZero(ComputableError, ZeroDivisionError):
    pass


class ZeroDivisorUndetected(ComputableError):
    """Sign-witness search for a divisor ran out of fuel."""


class NegativeOperandDetected(ComputableError, ValueError):
    pass


class RangeExceeded(ComputableError, ValueError):
    pass


class DomainViolation(ComputableError, ValueError):
    pass


class DimensionMismatch(ComputableError, ValueError):
    pass


class NonInvertibleMap(ComputableError, ValueError):
    pass


class DepthOverflow(ComputableError):
    pass


class ViewportEmpty(ComputableError, ValueError):
    pass


class EmptyCloud(ComputableError):
    """An oracle produced no In points: its contract is violated upstream."""


class EmptyResult(ComputableError):
    """A graph slice came back empty: the graph oracle is broken."""


class NotStablyConvergent(ComputableError):
    pass


class FuelExhausted(ComputableError):
    pass


class BranchBudgetExceeded(ComputableError):
    pass


class UnresolvedLabel(ParseError):
    pass


class UninitializedRegister(ParseError):
    pass


class ConstantNotExact(ComputableError, ValueError):
    """A named real constant was used where only exact dyadics are allowed."""
