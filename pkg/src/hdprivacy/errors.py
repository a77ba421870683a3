"""Exception hierarchy shared by every module.

Each class carries the CLI exit code used when it escapes a subcommand.
"""


class HDError(Exception):
    exit_code = 4


class ConfigError(HDError, ValueError):
    """Invalid shape, seed or parameter combination."""

    exit_code = 3


class DimensionError(HDError, ValueError):
    """Operands have incompatible lengths."""

    exit_code = 4


class InputError(HDError, ValueError):
    """A value lies outside the domain an operation accepts."""

    exit_code = 4


class UndefinedSimilarityError(HDError, ZeroDivisionError):
    exit_code = 4


class ContractError(HDError, RuntimeError):
    """An operation was applied in a state that forbids it."""

    exit_code = 4


class ParseError(HDError, ValueError):
    """Malformed file content. ``line`` is 1-based when known."""

    exit_code = 2

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
