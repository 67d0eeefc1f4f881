"""Exception types raised across the package."""


class ConfigurationError(ValueError):
    """Invalid parameter or configuration value."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DimensionError(ValueError):
    """Array shapes that must agree do not."""


class ScheduleError(ValueError):
    """A solver step does not move strictly toward t_min."""


class CapabilityError(RuntimeError):
    """The backbone lacks a capability the caller needs (e.g. attention maps)."""


class InputError(ValueError):
    """Malformed user input such as an empty instruction."""
