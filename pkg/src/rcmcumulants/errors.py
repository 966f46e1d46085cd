"""Exception hierarchy shared by every module of the package."""


class RCMError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class DomainError(RCMError, ValueError):
    """An argument lies outside the domain of an operation."""

    exit_code = 3


class DivergenceError(RCMError, ArithmeticError):
    """A Gaussian integral diverges (singular quadratic form)."""

    exit_code = 4

    def __init__(self, message, partition=None):
        super().__init__(message)
        self.partition = partition


class ResourceLimitError(RCMError):
    """A ground set exceeds the configured enumeration limit."""

    exit_code = 5

    def __init__(self, message, limit=None):
        super().__init__(message)
        self.limit = limit
