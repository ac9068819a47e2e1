"""Grid-sampled state and matrix fields."""

from dataclasses import dataclass, field

import numpy as np

from dualflow.errors import StructuralError


@dataclass(frozen=True)
class StateField:
    """
    Samples of v on the time nodes, shape (Nt + 1, Nx, n).

    Attributes:
        values: The samples.
        labels: Component names, e.g. ("q", "rho").
    """

    values: np.ndarray
    labels: tuple = field(default=())

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 3:
            raise StructuralError(f"state field must be 3-dimensional, got shape {values.shape}")
        if self.labels and len(self.labels) != values.shape[-1]:
            raise StructuralError(f"{len(self.labels)} labels for {values.shape[-1]} components")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[-1]

    def check_grid(self, grid, n: int = None) -> None:
        """Raise StructuralError unless the shape matches the grid and n."""
        expected = (grid.Nt + 1, grid.Nx, self.n if n is None else n)
        if self.values.shape != expected:
            raise StructuralError(f"state field shape {self.values.shape}, expected {expected}")

    def component(self, label: str) -> np.ndarray:
        return self.values[..., self.labels.index(label)]


@dataclass(frozen=True)
class MatrixField:
    """Symmetric matrix samples, shape (Nt + 1, Nx, N, N)."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 4 or values.shape[-1] != values.shape[-2]:
            raise StructuralError(f"matrix field must have shape (Nt+1, Nx, N, N), got {values.shape}")
        scale = max(1.0, float(np.max(np.abs(values)))) if values.size else 1.0
        asym = float(np.max(np.abs(values - np.swapaxes(values, -1, -2)))) if values.size else 0.0
        if asym > 1e-12 * scale:
            raise StructuralError(f"matrix field is not symmetric (defect {asym:.3e})")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def N(self) -> int:
        return self.values.shape[-1]

    def check_grid(self, grid, N: int = None) -> None:
        expected = (grid.Nt + 1, grid.Nx, self.N if N is None else N, self.N if N is None else N)
        if self.values.shape != expected:
            raise StructuralError(f"matrix field shape {self.values.shape}, expected {expected}")

    def trace(self) -> np.ndarray:
        return np.trace(self.values, axis1=-2, axis2=-1)


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Symmetric part over the last two axes."""
    return 0.5 * (a + np.swapaxes(a, -1, -2))
