"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: usage errors exit 1, data errors 2,
numeric failures 3.
"""


class KgbenchError(Exception):
    """Base class for all toolkit errors."""


class DataError(KgbenchError, ValueError):
    """Malformed or inconsistent input data (bad lines, unknown ids, ...)."""


class NumericError(KgbenchError, ArithmeticError):
    """Non-finite values where finite numbers are required."""


class UsageError(KgbenchError):
    """Invalid command-line or API usage."""
