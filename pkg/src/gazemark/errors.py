"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A config value or combination of values is unusable."""


class LayoutError(ConfigurationError):
    """Menu geometry parameters violate a hard constraint."""


class InfeasiblePathRequest(ConfigurationError):
    """A requested target-path mix exceeds the available path pool."""


class SessionStateError(RuntimeError):
    """An operation was applied to a session in the wrong state."""
