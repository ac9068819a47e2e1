"""Total entropy timelines and the sharp change of variables."""

from dataclasses import dataclass

import numpy as np
import pandas as pd

from dualflow.errors import StructuralError
from dualflow.grid.fields import MatrixField, StateField
from dualflow.grid.spacetime import SpaceTimeGrid


@dataclass(frozen=True)
class EntropyTimeline:
    """
    Total entropy K(t) at the time nodes.

    Attributes:
        t: Time nodes.
        K_samples: int K(v(t, x)) dx, or 1/2 int tr M dx for subsolutions.
    """

    t: np.ndarray
    K_samples: np.ndarray

    def __post_init__(self):
        if np.shape(self.t) != np.shape(self.K_samples):
            raise StructuralError(f"{np.shape(self.t)} nodes for {np.shape(self.K_samples)} samples")

    @property
    def K0(self) -> float:
        return float(self.K_samples[0])

    def drift(self) -> float:
        """max_t |K(t) - K0| / max(1, K0)."""
        return float(np.max(np.abs(self.K_samples - self.K0)) / max(1.0, abs(self.K0)))

    def weighted_integral(self, weight, upper: float = None) -> float:
        return weight.weighted_integral(self.t, self.K_samples, upper=upper)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.t, "K": self.K_samples})


def sharp(model, v: np.ndarray) -> np.ndarray:
    """
    v# = grad K(v).

    Raises:
        DomainError: If v leaves the interior of dom F.
    """
    v = np.asarray(v, dtype=float)
    model.check_domain(v, interior=True)
    return model.grad_K(v)


def unsharp(model, vsharp: np.ndarray) -> np.ndarray:
    """
    Inverse sharp map.

    Raises:
        DomainError: If the preimage leaves the interior of dom F.
    """
    v = model.sharp_inverse(np.asarray(vsharp, dtype=float))
    model.check_domain(v, interior=True)
    return v


def total_entropy(model, grid: SpaceTimeGrid, v) -> EntropyTimeline:
    """
    Per-node quadrature of K(v).

    Args:
        model: The ModelSpec.
        grid: Grid of v.
        v: StateField (or raw values) of shape (Nt + 1, Nx, n).

    Returns:
        EntropyTimeline on the grid's nodes.

    Raises:
        DomainError: If some sample lies outside dom F.
    """
    if not isinstance(v, StateField):
        v = StateField(v)
    v.check_grid(grid, model.n)
    model.check_domain(v.values)
    return EntropyTimeline(grid.t, grid.space_integral(model.K(v.values)))


def matrix_entropy(grid: SpaceTimeGrid, M) -> EntropyTimeline:
    """Subsolution entropy 1/2 int tr M dx."""
    if not isinstance(M, MatrixField):
        M = MatrixField(M)
    M.check_grid(grid)
    return EntropyTimeline(grid.t, 0.5 * grid.space_integral(M.trace()))
