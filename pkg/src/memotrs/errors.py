"""Exception types shared across the package."""

from __future__ import annotations


class MemotrsError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(MemotrsError):
    """Bad input text; line and column are 1-based when known."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        where = f"{line}:{column}: " if line else ""
        super().__init__(f"{where}{message}")
        self.line = line
        self.column = column


class SignatureError(MemotrsError):
    """Malformed signature: duplicate or overlapping symbol declarations."""


class ArityError(MemotrsError):
    """A symbol is applied to the wrong number of arguments."""


class RuleError(MemotrsError):
    """A rewrite rule violates a structural requirement."""


class LinearityError(RuleError):
    """A left-hand side repeats a variable."""


class AmbiguityError(RuleError):
    """Two left-hand sides for the same operation can match a common call."""


class StuckError(MemotrsError):
    """Evaluation reached an operation call no rule matches."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class BudgetExceededError(MemotrsError):
    """Evaluation exceeded its step budget."""

    def __init__(self, message: str, engine: str, budget: int):
        super().__init__(message)
        self.engine = engine
        self.budget = budget


class HeapError(MemotrsError):
    """Bad heap access: unknown location or malformed node."""


class GrsrError(MemotrsError):
    """Ill-formed function-algebra expression (arity or algebra mismatch)."""
