"""Exception types shared across the package."""


class FakedStatesError(Exception):
    """Base class for all package errors."""


class ConfigError(FakedStatesError, ValueError):
    """Invalid configuration or arguments (CLI exit code 2)."""


class ParseError(FakedStatesError, ValueError):
    """Malformed input data (CLI exit code 3).

    Attributes:
        line: 1-based line number of the offending row, if known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InfeasibleError(FakedStatesError, ValueError):
    """A computation has no admissible solution (CLI exit code 4)."""


class NoArrivalsError(InfeasibleError):
    """The attack delivers no photons to Bob, so the QBER is undefined."""


class QubitDestroyedError(FakedStatesError, ValueError):
    """A time-bin state lost one of its two pulse windows."""
