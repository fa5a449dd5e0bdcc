"""Exception types shared across the package."""


class SoLabError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(SoLabError):
    """Raised on malformed concrete syntax.

    Carries the 1-based line/column of the offending token when known.
    """

    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{line}:{col}: {message}"
        super().__init__(message)


class ValidationError(SoLabError):
    """Raised when a formula or structure violates its contract."""


class ArityBoundError(SoLabError):
    """Raised when a quantifier arity exceeds a model's relation-universe bound."""


class BudgetExceededError(SoLabError):
    """Raised when an enumeration would exceed the configured budget."""

    def __init__(self, message, required=None, budget=None):
        self.required = required
        self.budget = budget
        super().__init__(message)
