from __future__ import annotations


class OrliczMaximaError(Exception):
    """Base class for every error raised by the library."""


class DomainError(OrliczMaximaError, ValueError):
    """A parameter lies outside the domain where the operation is defined."""


class UnsupportedOperationError(OrliczMaximaError, NotImplementedError):
    pass


class BracketError(OrliczMaximaError):
    """Root bracket endpoints have the same sign."""


class DivergenceError(OrliczMaximaError):
    pass


class QuadratureError(OrliczMaximaError):
    def __init__(self, message: str, *, estimate: float, error_bound: float) -> None:
        super().__init__(message)
        self.message = message
        self.estimate = estimate
        self.error_bound = error_bound
