"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class UnsupportedParameterError(ValueError):
    """Parameterisation not served by the requested evaluation path."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to converge.

    ``diagnostics`` carries whatever the failing routine knew at the time
    (partial sums, term counts, quadrature flags) so callers can log it.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class SeriesDivergenceError(NumericalError):
    """An infinite series did not meet its tail tolerance within budget."""


class ConsistencyError(NumericalError):
    """A computed probability fell outside [0, 1] beyond tolerance."""
