"""Exception types shared across the package."""


class SegalignError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(SegalignError):
    """Invalid configuration: bad field values, unknown keys, mismatched
    topologies. The CLI maps these to exit code 2."""
