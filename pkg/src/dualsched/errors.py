"""Exception hierarchy shared across the package."""


class DualschedError(Exception):
    """Base class for all errors raised by this package."""


class InputError(DualschedError):
    """A caller-supplied value is invalid (unknown id, bad parameter)."""


class ConfigError(DualschedError):
    """A config document failed to parse or validate."""


class CapacityError(DualschedError):
    """A request exceeded the exhaustive-enumeration guard."""


class RoutingError(DualschedError):
    """No directed path exists for a flow."""


class SimStateError(DualschedError):
    """A simulation was driven past its terminal state."""


class InternalInvariantError(DualschedError):
    """An internal invariant was violated; indicates a bug, not bad input."""
