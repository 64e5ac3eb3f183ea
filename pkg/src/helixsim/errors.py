"""Exception types raised across the package."""


class HelixSimError(Exception):
    """Base class for all errors raised by helixsim."""


class InvalidInputError(HelixSimError, ValueError):
    """A value violates a documented precondition or invariant.

    ``field`` names the offending attribute when the error comes from a
    parameter record, so configuration parsing can report it by key.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class ConfigurationError(HelixSimError, ValueError):
    """A run configuration is malformed or internally inconsistent."""

    def __init__(self, message, keys=()):
        super().__init__(message)
        self.keys = tuple(keys)
