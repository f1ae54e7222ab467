"""Exception hierarchy shared by the package."""


class EventGNEError(Exception):
    """Base class for all package errors."""


class EventDataError(EventGNEError, ValueError):
    """Malformed event file, out-of-grid event, or invalid event selection."""


class SceneSpecError(EventGNEError, ValueError):
    """Invalid synthetic scene description."""


class DegenerateSelectionError(EventGNEError, ValueError):
    """The gate selects no events (zero gate mass)."""


class DegenerateMotionError(EventGNEError, ValueError):
    """Selected events have no spread in time, so the slope is undefined."""


class LevelInfeasibleError(EventGNEError):
    """No unclaimed events are left for a player."""


class OracleSizeError(EventGNEError, ValueError):
    """Too many free events for exhaustive enumeration."""


class SolverError(EventGNEError):
    """A level of the N-level solve failed.

    ``level`` is the 1-based player index and ``partial`` holds whatever
    levels completed before the failure.
    """

    def __init__(self, message, level=None, partial=None):
        super().__init__(message)
        self.level = level
        self.partial = partial
