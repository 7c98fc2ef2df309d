"""Exception types shared across the package."""


class HolomuxError(Exception):
    """Base class for all package errors."""


class DomainError(HolomuxError, ValueError):
    """An input lies outside the domain where a quantity is defined."""


class NumericError(HolomuxError, ArithmeticError):
    """A numerical procedure failed to meet its accuracy target.

    ``best_estimate`` carries whatever the procedure had when it gave up,
    and ``diagnostics`` a free-form dict for post-mortem inspection.
    """

    def __init__(self, message, best_estimate=None, diagnostics=None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.diagnostics = dict(diagnostics or {})
