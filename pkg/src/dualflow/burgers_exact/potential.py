"""Periodic potentials of zero-mean Burgers data."""

from dataclasses import dataclass

import numpy as np

from dualflow.errors import PreconditionError
from dualflow.models.initial_data import TrigSeries


@dataclass(frozen=True)
class Potential:
    """
    phi with phi' = v0 for a zero-mean trig series v0.

    Attributes:
        v0: The initial datum.
    """

    v0: TrigSeries

    def __post_init__(self):
        if abs(self.v0.mean()) > 1e-14:
            raise PreconditionError(f"v0 must have zero mean, got {self.v0.mean():.3e}")

    @classmethod
    def parse(cls, text: str) -> "Potential":
        return cls(TrigSeries.parse(text))

    def __call__(self, x):
        return self.v0.antiderivative(x)

    def derivative(self, x):
        return self.v0(x)

    def second_derivative(self, x):
        return self.v0.derivative(x)

    def oscillation(self, samples: int = 4096) -> float:
        """max phi - min phi over one period."""
        values = self(np.arange(samples) / samples)
        return float(values.max() - values.min()) if self.v0.terms else 0.0
