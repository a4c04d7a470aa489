"""Exception hierarchy shared by the library and the CLI.

Each class carries the process exit code the CLI maps it to.
"""


class ConformalGuardError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ParseError(ConformalGuardError):
    """A file (dataset CSV, score CSV, calibration artifact) is malformed."""

    exit_code = 3


class ParameterError(ConformalGuardError):
    """A configuration value is outside its admissible range."""

    exit_code = 4


class ConsistencyError(ConformalGuardError):
    """Two inputs that must agree (e.g. budget vs. calibration) do not."""

    exit_code = 5


class ValidationError(ConformalGuardError):
    """Input data violates a precondition (non-finite value, empty input...)."""

    exit_code = 6
