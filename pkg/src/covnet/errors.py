"""Exception hierarchy. Each family maps onto one CLI exit code."""


class CovnetError(Exception):
    exit_code = 1


class InstanceError(CovnetError):
    """Malformed input: bad file, bad vertex id, self-loop, unparseable rational."""

    exit_code = 3


class ShapeError(InstanceError):
    """Demand family does not have the shape an algorithm needs."""


class GraphError(InstanceError):
    """Structural problem with the graph (disconnected, weighted where unit costs are required)."""


class InfeasibleError(InstanceError):
    """Some terminal set cannot be connected."""


class InvalidSolutionError(CovnetError):
    exit_code = 2


class InvariantViolation(CovnetError):
    exit_code = 2


class OracleLimitError(CovnetError):
    exit_code = 4
