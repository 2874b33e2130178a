"""Exception hierarchy shared across the toolkit."""


class SarhawkError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class DegenerateTrace(SarhawkError):
    """Motion trace has too little signal to process."""

    exit_code = 3


class DimensionMismatch(SarhawkError):
    """Point sequences of different lengths were compared."""

    exit_code = 3


class EmptyTrainingSet(SarhawkError):
    """Classification requested with no templates loaded."""

    exit_code = 3


class NoParse(SarhawkError):
    """No grammar rule matched the transcript above the minimum score."""

    exit_code = 4


class NoMatch(SarhawkError):
    """Selection input matched no drone."""

    exit_code = 4


class AboveHorizon(SarhawkError):
    """Pointing ray never intersects the ground plane."""

    exit_code = 4


class NoPath(SarhawkError):
    """Planner failed to connect start and goal within budget."""

    exit_code = 5


class InfeasibleDynamics(SarhawkError):
    """Trajectory would exceed the configured acceleration limit."""

    exit_code = 5


class InvalidScenario(SarhawkError):
    """Scenario configuration failed validation."""

    exit_code = 6


class CorruptTrace(SarhawkError):
    """Trace or log file failed to parse.

    ``offset`` is the 1-based line number of the first bad record.
    """

    exit_code = 7

    def __init__(self, message, offset=None):
        super().__init__(message if offset is None else f"{message} (line {offset})")
        self.offset = offset


class SessionClosed(SarhawkError):
    """Event submitted to a session that is no longer live."""

    exit_code = 8
