"""Exception types shared across the package.

Plain ``ValueError`` is used for domain errors on function arguments; the
classes below exist where the CLI needs to map failures to distinct exit
codes or where callers benefit from a narrower except clause.
"""


class ConfigError(ValueError):
    """A run configuration failed schema validation (CLI exit code 2)."""


class DataParseError(ValueError):
    """An input data file could not be parsed (CLI exit code 4)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DegenerateDataError(ValueError):
    """Input data cannot constrain the requested fit or model."""
