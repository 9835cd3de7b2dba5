"""Exception hierarchy shared by every module of the package."""


class PlantedGraphError(Exception):
    """Base class for all errors raised by :mod:`plantedgraph`."""


class InvalidArgumentError(PlantedGraphError, ValueError):
    """A precondition on an argument was violated."""


class InvalidParameterError(InvalidArgumentError):
    """A family constructor or method parameter is out of range."""


class SubgraphTooLargeError(InvalidArgumentError):
    """The planted graph has more vertices than the host graph."""


class EmptyGraphError(InvalidArgumentError):
    """An operation that needs at least one edge received an edgeless graph."""


class InvalidEmbeddingError(InvalidArgumentError):
    """A vertex labeling is not injective or maps outside the host graph."""


class BudgetExceededError(PlantedGraphError):
    """A combinatorial search visited more nodes than its configured budget.

    Attributes:
        visited: number of search nodes visited before giving up.
        budget: the configured node budget.
    """

    def __init__(self, message, visited=None, budget=None):
        super().__init__(message)
        self.visited = visited
        self.budget = budget


class NoConvergenceError(PlantedGraphError):
    """An iterative solver stopped before meeting its tolerance.

    Attributes:
        result: best iterate available when the solver stopped (may be None).
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
