"""Result record shared by every hypothesis test."""

from __future__ import annotations

from dataclasses import dataclass, field
import math


def json_float(x):
    """Map non-finite floats to strings so reports stay valid JSON."""
    x = float(x)
    if math.isfinite(x):
        return x
    if math.isnan(x):
        return "nan"
    return "inf" if x > 0 else "-inf"


@dataclass(frozen=True)
class TestOutcome:
    """Statistic, threshold and binary decision of a named test.

    Attributes:
        name: test identifier such as ``"spectral"`` or ``"exhaustive"``.
        statistic: value the decision is based on.
        threshold: comparison value; see ``metadata["rule"]`` for the direction.
        decision: 1 rejects the null (a planted copy is declared present).
        metadata: test-specific extras, JSON-serializable.
        reliable: False when the underlying solver did not converge.
    """

    __test__ = False  # keep pytest from collecting this as a test class

    name: str
    statistic: float
    threshold: float
    decision: int
    metadata: dict = field(default_factory=dict)
    reliable: bool = True

    def to_dict(self) -> dict:
        return {"name": self.name,
                "statistic": json_float(self.statistic),
                "threshold": json_float(self.threshold),
                "decision": int(self.decision),
                "reliable": bool(self.reliable),
                "metadata": self.metadata}
