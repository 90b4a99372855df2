"""Exception types shared across the package."""


class SkywayError(Exception):
    """Base class for all domain errors raised by this package."""


class ConfigError(SkywayError):
    """A scenario or experiment configuration violates its constraints."""


class ReservationConflictError(SkywayError):
    """No recharging pad is free for the requested interval."""


class WindInfeasibleError(SkywayError):
    """The leg cannot be flown now: crosswind exceeds air speed or ground speed <= 0."""


class EmptyCandidateSetError(SkywayError):
    """No drone in the catalog can carry the package."""


class DeadEndError(SkywayError):
    """A search state has no successor actions."""


class UnreachableDestinationError(SkywayError):
    """No feasible plan exists from source to destination."""


class LivelockError(SkywayError):
    """The greedy composer revisited a node beyond the configured limit."""


class InstanceTooLargeError(SkywayError):
    """The network exceeds the node limit for exhaustive path search."""


class SpliceMismatchError(SkywayError):
    """A recomposed fragment does not align with the plan it should patch."""


class RouteInfeasibleError(SkywayError):
    """A fixed node sequence cannot be flown under current wind and battery."""
