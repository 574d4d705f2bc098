"""Exception hierarchy shared by every module."""


class CotpError(Exception):
    """Base class for all package errors."""


class ConfigError(CotpError, ValueError):
    """Invalid parameters or configuration."""


class CapacityExceeded(CotpError):
    """A dense object would exceed the configured dimension cap."""


class LabelClash(ConfigError):
    pass


class UnknownLabel(ConfigError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class InvalidState(CotpError, ValueError):
    """Array does not satisfy the density-matrix / pure-state invariants."""


class NotHermitian(InvalidState):
    pass


class MarginalMismatch(CotpError, ValueError):
    pass


class DegenerateProjection(CotpError, ValueError):
    pass


class EnumerationCapExceeded(CapacityExceeded):
    """Exhaustive enumeration is too large; sample instead."""
