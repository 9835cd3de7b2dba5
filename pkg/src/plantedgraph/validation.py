"""Argument checks shared by the library functions and the estimators."""

from __future__ import annotations

import math
import numbers

from .exceptions import EmptyGraphError, InvalidArgumentError, InvalidParameterError
from .graphs import Graph


def check_probability(q, name="q0", *, low_open=False, high_open=False) -> float:
    """Return ``q`` as a float after checking it lies in ``[0, 1]``.

    Args:
        q: value to check.
        name: argument name used in the error message.
        low_open: exclude 0.
        high_open: exclude 1.
    """
    if isinstance(q, bool) or not isinstance(q, numbers.Real):
        raise InvalidParameterError(f"{name} must be a real number, got {q!r}")
    q = float(q)
    if math.isnan(q) or q < 0.0 or q > 1.0 or (low_open and q == 0.0) or (high_open and q == 1.0):
        lo = "(" if low_open else "["
        hi = ")" if high_open else "]"
        raise InvalidParameterError(f"{name} must lie in {lo}0, 1{hi}, got {q}")
    return q


def check_int(x, name, minimum=None, maximum=None) -> int:
    """Return ``x`` as an int after a type and range check."""
    if isinstance(x, bool) or not isinstance(x, numbers.Integral):
        raise InvalidParameterError(f"{name} must be an integer, got {x!r}")
    x = int(x)
    if minimum is not None and x < minimum:
        raise InvalidParameterError(f"{name} must be >= {minimum}, got {x}")
    if maximum is not None and x > maximum:
        raise InvalidParameterError(f"{name} must be <= {maximum}, got {x}")
    return x


def check_positive(x, name) -> float:
    if isinstance(x, bool) or not isinstance(x, numbers.Real) or not x > 0 or math.isinf(x):
        raise InvalidParameterError(f"{name} must be a positive finite number, got {x!r}")
    return float(x)


def check_graph(G, name="G", *, nonempty=False) -> Graph:
    """Check ``G`` is a :class:`Graph`; with ``nonempty`` it must have an edge."""
    if not isinstance(G, Graph):
        raise InvalidArgumentError(f"{name} must be a Graph, got {type(G).__name__}")
    if nonempty and G.m == 0:
        raise EmptyGraphError(f"{name} must have at least one edge")
    return G
