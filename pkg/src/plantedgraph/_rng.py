"""Reproducible random streams.

Every sampler draws from a Philox4x64-10 counter-based generator whose key
is derived by :class:`numpy.random.SeedSequence` from ``(seed, *stream)``.
The same ``(seed, stream)`` pair therefore yields the same bit stream on any
platform, and distinct stream ids give statistically independent streams.
"""

import numpy as np

from .exceptions import InvalidArgumentError


def make_rng(seed, *stream):
    """Return a Philox-backed generator for ``seed`` and an optional stream id.

    ``seed`` may already be a :class:`numpy.random.Generator`, in which case it
    is returned unchanged (and ``stream`` must be empty).
    """
    if isinstance(seed, np.random.Generator):
        if stream:
            raise InvalidArgumentError("stream ids cannot be combined with a Generator")
        return seed
    if isinstance(seed, (bool, np.bool_)) or not isinstance(seed, (int, np.integer)):
        raise InvalidArgumentError(f"seed must be a non-negative integer, got {seed!r}")
    if seed < 0:
        raise InvalidArgumentError(f"seed must be non-negative, got {seed}")
    for s in stream:
        if not isinstance(s, (int, np.integer)) or s < 0:
            raise InvalidArgumentError(f"stream ids must be non-negative integers, got {s!r}")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(ss))
