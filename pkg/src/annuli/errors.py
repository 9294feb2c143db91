"""Exception types shared across the toolkit."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class BudgetExceeded(RuntimeError):
    """An enumeration would exceed the configured point/work budget."""


class RelationDetected(ArithmeticError):
    """An exact integer relation was found where a positive minimum was expected.

    Carries the witness coefficients so callers can report the relation.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class InconclusiveScan(RuntimeError):
    """A window scan did not see enough data to produce a value."""
