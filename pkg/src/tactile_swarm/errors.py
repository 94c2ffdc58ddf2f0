"""Exception types shared across the simulator."""


class TactileSwarmError(Exception):
    """Base class for all library errors."""


class InvalidParam(TactileSwarmError):
    """A parameter violates its documented domain."""


class OutOfBounds(TactileSwarmError):
    """A robot center was queried outside the workspace (engine bug)."""


class EmptyCandidates(TactileSwarmError):
    """Goal selection was asked to choose from zero candidates."""


class UnknownObserver(TactileSwarmError):
    """A neighbor query named a robot id that is not in the position table."""


class InvalidScenario(TactileSwarmError):
    """A scenario violates the run preconditions (spacing, bounds, obstacles)."""


class ParseError(TactileSwarmError):
    """A scenario or sweep file could not be parsed."""
