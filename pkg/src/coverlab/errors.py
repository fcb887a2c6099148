"""Exception types shared across the package."""


class CoverlabError(Exception):
    """Base class for all package-specific errors."""


class InputError(CoverlabError, ValueError):
    """A malformed argument, graph, action, or scenario field."""


class BudgetExceededError(CoverlabError, RuntimeError):
    """An enumeration or solver exceeded its configured budget."""

    def __init__(self, message: str, partial_count: int | None = None):
        super().__init__(message)
        self.partial_count = partial_count


class FolnerVerificationError(CoverlabError, ValueError):
    """A candidate set failed certificate verification.

    Carries the offending generator and its exact ratio so callers can
    report which direction of the action broke the bound.
    """

    def __init__(self, generator: int, ratio, epsilon):
        super().__init__(
            f"generator {generator} has symmetric-difference ratio {ratio} "
            f"exceeding epsilon {epsilon}"
        )
        self.generator = generator
        self.ratio = ratio
        self.epsilon = epsilon


class InequalityViolation(CoverlabError, AssertionError):
    """An audited inequality failed. Indicates a bug, not a math outcome."""


class NumericalError(CoverlabError, RuntimeError):
    """An eigensolve or other numeric routine missed its tolerance."""
