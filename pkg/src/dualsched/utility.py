"""Per-flow utility functions.

Both kinds are strictly concave, increasing on [0, 1], with U(0) = 0, so a
flow that is priced out of the network contributes nothing (never a gain).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InputError

LOG1P = "log1p"
QUADRATIC = "quadratic"
UTILITY_KINDS = (LOG1P, QUADRATIC)


@dataclass(frozen=True)
class UtilityFunction:
    """Weighted concave utility of a normalized flow rate.

    kind "log1p":     U(x) = w * ln(1 + x)
    kind "quadratic": U(x) = w * (x - x^2 / 2)
    """

    kind: str
    weight: float

    def __post_init__(self):
        if self.kind not in UTILITY_KINDS:
            raise InputError(f"unknown utility kind {self.kind!r}; expected one of {UTILITY_KINDS}")
        if not (self.weight > 0):
            raise InputError(f"utility weight must be positive, got {self.weight}")

    def value(self, x: float) -> float:
        if self.kind == LOG1P:
            return self.weight * math.log1p(x)
        return self.weight * (x - 0.5 * x * x)

    def derivative(self, x: float) -> float:
        if self.kind == LOG1P:
            return self.weight / (1.0 + x)
        return self.weight * (1.0 - x)

    def inverse_derivative(self, q: float) -> float:
        """Solve U'(x) = q for x. Caller is responsible for clipping to [0, 1]."""
        if not (q > 0):
            raise InputError(f"inverse_derivative needs q > 0, got {q}")
        if self.kind == LOG1P:
            return self.weight / q - 1.0
        return 1.0 - q / self.weight
