"""Exception types shared across the package."""


class ConfigError(Exception):
    """Bad user configuration: unknown relation names, empty trigger sets,
    invalid hyperparameter combinations.  Mapped to exit code 2 by the CLI."""


class DataError(Exception):
    """Malformed or inconsistent input data.  Mapped to exit code 1 by the CLI."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
