"""Exception hierarchy shared across the package."""

from __future__ import annotations


class TseconError(Exception):
    """Base class for all package-specific errors."""


class IngestError(TseconError):
    """Raised when CSV input is malformed: bad dates, gaps, duplicate or
    unparseable rows. Carries the offending row description."""

    def __init__(self, message: str, row: object = None) -> None:
        super().__init__(message)
        self.row = row


class DomainError(TseconError):
    """Input outside an operation's documented domain (bad lag order,
    range outside the series, non-positive values where logs are taken)."""


class NumericalError(TseconError):
    """Linear-algebra or conditioning failure: singular matrix, Hessian
    not negative definite, degenerate regression."""

    def __init__(self, message: str, detail: object = None) -> None:
        super().__init__(message)
        self.detail = detail


class FitError(TseconError):
    """Estimation failed: optimizer did not converge and no usable point
    was found. Carries the optimizer trace when available."""

    def __init__(self, message: str, trace: object = None) -> None:
        super().__init__(message)
        self.trace = trace
