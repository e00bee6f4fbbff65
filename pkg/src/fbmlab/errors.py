"""Exception types shared across the library."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class PreconditionError(ValueError):
    """Input data violates a documented precondition (e.g. f(0) != 0)."""


class NumericsError(RuntimeError):
    """A numerical routine failed to reach its accuracy target."""


class FeasibilityError(ValueError):
    """A coefficient table is infeasible (some b_n < 0).

    Carries the first violating index in ``n``.
    """

    def __init__(self, message, n=None):
        super().__init__(message)
        self.n = n
