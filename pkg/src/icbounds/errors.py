"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested operation."""


class GenieEvaluationError(DomainError):
    """The genie objective cannot be evaluated at the given parameters.

    ``term`` names the logarithm whose argument is not positive.
    """

    def __init__(self, term, message):
        super().__init__(f"{term}: {message}")
        self.term = term


class SingularCovarianceError(DomainError):
    """A conditional covariance block that must be nonsingular is singular."""

    def __init__(self, block, message="conditional covariance is singular"):
        super().__init__(f"{message} (block: {block})")
        self.block = block


class UnboundedError(ArithmeticError):
    """The objective is unbounded above on the feasible set."""


class InfeasibleError(ArithmeticError):
    """The inequality system has no solution."""


class RowExplosionError(RuntimeError):
    """Elimination produced more intermediate rows than the guard allows."""


class ParseError(ValueError):
    """Malformed inequality text; ``line`` is 1-based."""

    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line
