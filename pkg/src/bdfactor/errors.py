"""Exception types shared across the package."""


class BDFactorError(Exception):
    """Base class for all package errors."""


class NotFactorizable(BDFactorError):
    """No stochastic factorization exists for the given chain."""


class Inconclusive(BDFactorError):
    """A numerical criterion could not be resolved within the given budget."""


class AdmissibilityViolation(BDFactorError):
    """A factor coefficient left [0, 1] during the recurrence.

    Carries the first offending index and value so callers can assert
    where positivity breaks down.
    """

    def __init__(self, index: int, value, name: str = "coefficient"):
        self.index = index
        self.value = value
        self.name = name
        super().__init__(f"{name}[{index}] = {value} outside [0, 1]")


class NumericBreakdown(BDFactorError):
    """A denominator became too small to continue a recurrence."""

    def __init__(self, index: int, value):
        self.index = index
        self.value = value
        super().__init__(f"denominator at index {index} is {value}")


class EvaluationError(BDFactorError):
    """Continued fraction evaluation hit a zero denominator."""

    def __init__(self, index: int):
        self.index = index
        super().__init__(f"B_{index} = 0: convergent undefined")


class DomainError(BDFactorError):
    """Input outside the mathematical domain of an operation."""


class PrecisionError(BDFactorError):
    """Working precision was insufficient (for example a Hankel underflow)."""

    def __init__(self, degree: int, detail: str = ""):
        self.degree = degree
        super().__init__(f"precision loss at degree {degree}" + (f": {detail}" if detail else ""))


class SpecError(BDFactorError):
    """An urn specification produced an impossible configuration."""
