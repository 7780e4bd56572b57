"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where the model is defined."""


class ConvergenceError(ArithmeticError):
    """A numerical routine failed to reach the requested tolerance."""


class InconsistentDataError(ValueError):
    """The data have zero likelihood at every candidate frequency."""
