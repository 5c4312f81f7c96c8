"""Exception types mapped to CLI exit codes."""


class BpqrError(Exception):
    """Base class for package errors."""

    exit_code = 1


class ConfigError(BpqrError):
    """Invalid configuration value or inconsistent run settings."""

    exit_code = 2


class DataError(BpqrError):
    """Malformed or inconsistent input data."""

    exit_code = 3


class NumericError(BpqrError):
    """Numerical failure (non-SPD precision, non-finite values, ...)."""

    exit_code = 4
