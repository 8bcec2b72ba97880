"""Exception hierarchy shared by all qgl modules."""


class QglError(Exception):
    """Base class for every error raised by this package."""


class GraphError(QglError):
    """A graph failed validation."""


class LoopEdgeError(GraphError):
    """An edge connects a vertex to itself."""


class NonPositiveLengthError(GraphError):
    """An edge has zero, negative, or non-finite length."""


class DuplicateEdgeError(GraphError):
    """Two edges connect the same unordered vertex pair."""


class UnknownVertexError(GraphError):
    """A vertex id is not declared in the graph."""


class DisconnectedError(GraphError):
    """Some vertex is unreachable from the root."""


class BadParamsError(QglError):
    """An operation received out-of-range parameters."""


class GridMismatchError(QglError):
    """Two grid functions live on different grids."""


class NonPositiveDensityError(QglError):
    """A density must be strictly positive everywhere."""


class SingularSystemError(QglError):
    """The assembled linear system is singular or inconsistent."""


class SolverDivergedError(QglError):
    """A linear solve did not reach the required residual."""


class TimeNotOnGridError(QglError):
    """A requested time is not one of the trajectory snapshot times."""


class ConfigError(QglError):
    """An experiment configuration file could not be parsed or validated."""
