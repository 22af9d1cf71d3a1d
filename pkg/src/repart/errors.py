"""Exception types raised across the package."""


class RepartError(Exception):
    """Base class for all package errors."""


class InvalidInstance(RepartError, ValueError):
    """Instance parameters or partitions violate the model."""


class BadParameters(RepartError, ValueError):
    """Generator or algorithm parameters are outside their supported range."""


class CapacityExceeded(RepartError):
    """A strict move would push a server above its capacity."""


class NoBalancedAssignment(RepartError):
    """No perfectly balanced assignment respecting the components exists.

    Under the model assumptions this cannot happen, so it signals corrupt input
    (e.g. a request sequence that does not respect any equal-size partition).
    """


class WrongServerCount(RepartError, ValueError):
    pass


class SameServer(RepartError, ValueError):
    pass


class OffIsZero(RepartError, ZeroDivisionError):
    """The offline optimum is zero while the online algorithm paid something."""


class ApproximationFailed(RepartError):
    """The approximate balancing heuristic could not meet its load bound."""
