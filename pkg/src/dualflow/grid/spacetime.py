"""Periodic 1D space x uniform time grid and its quadrature rules."""

from dataclasses import dataclass

import numpy as np

from dualflow.errors import StructuralError

TIME_RULES = ("trapezoid", "left")


@dataclass(frozen=True)
class SpaceTimeGrid:
    """
    Uniform cell-centered grid on the unit torus times [0, T].

    Attributes:
        Nx: Number of spatial cells on [0, 1).
        Nt: Number of time slabs.
        T: Final time.
    """

    Nx: int
    Nt: int
    T: float

    def __post_init__(self):
        if int(self.Nx) != self.Nx or self.Nx < 1:
            raise ValueError(f"Nx must be a positive integer, got {self.Nx!r}")
        if int(self.Nt) != self.Nt or self.Nt < 1:
            raise ValueError(f"Nt must be a positive integer, got {self.Nt!r}")
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T!r}")

    @property
    def dx(self) -> float:
        return 1.0 / self.Nx

    @property
    def dt(self) -> float:
        return self.T / self.Nt

    @property
    def x(self) -> np.ndarray:
        """Cell centers."""
        return (np.arange(self.Nx) + 0.5) * self.dx

    @property
    def t(self) -> np.ndarray:
        """Time nodes, Nt + 1 of them."""
        return np.linspace(0.0, self.T, self.Nt + 1)

    @property
    def cell_measure(self) -> float:
        return self.dx * self.dt

    def time_weights(self, rule: str = "trapezoid") -> np.ndarray:
        """
        Quadrature weights on the time nodes.

        Args:
            rule: "trapezoid" (halved endpoints) or "left" (slabs [t_k, t_k+1)
                carried by their left node, zero weight at T).

        Returns:
            Array of shape (Nt + 1,).
        """
        if rule not in TIME_RULES:
            raise ValueError(f"unknown time rule {rule!r}, expected one of {TIME_RULES}")
        weights = np.full(self.Nt + 1, self.dt)
        if rule == "trapezoid":
            weights[0] *= 0.5
            weights[-1] *= 0.5
        else:
            weights[-1] = 0.0
        return weights

    def quadrature(self, field: np.ndarray, rule: str = "trapezoid") -> float:
        """
        Integrate a scalar grid field.

        Args:
            field: Shape (Nx,) for a spatial integral or (Nt + 1, Nx) for a
                space-time integral.
            rule: Time rule for space-time fields.

        Returns:
            The integral as a float.

        Raises:
            StructuralError: If the shape does not match the grid.
        """
        field = np.asarray(field, dtype=float)
        if field.shape == (self.Nx,):
            return float(np.sum(field) * self.dx)
        if field.shape == (self.Nt + 1, self.Nx):
            return float(self.time_weights(rule) @ field.sum(axis=1) * self.dx)
        raise StructuralError(
            f"field shape {field.shape} matches neither ({self.Nx},) nor "
            f"({self.Nt + 1}, {self.Nx})"
        )

    def space_integral(self, field: np.ndarray) -> np.ndarray:
        """Integrate over x along the cell axis (axis 1 of (Nt + 1, Nx, ...))."""
        field = np.asarray(field, dtype=float)
        if field.ndim < 2 or field.shape[1] != self.Nx:
            raise StructuralError(f"expected cell axis of length {self.Nx} at axis 1, got {field.shape}")
        return field.sum(axis=1) * self.dx

    def node_index(self, t: float) -> int:
        """Index of the time node equal to t (to rounding)."""
        k = int(round(t / self.dt))
        if k < 0 or k > self.Nt or abs(k * self.dt - t) > 1e-9 * max(1.0, self.T):
            raise ValueError(f"t={t} is not a node of a grid with dt={self.dt}")
        return k

    def restrict(self, T1: float) -> "SpaceTimeGrid":
        """Grid on [0, T1], T1 being a node of this grid."""
        return SpaceTimeGrid(self.Nx, self.node_index(T1), self.node_index(T1) * self.dt)

    def refine(self) -> "SpaceTimeGrid":
        """Grid with Nx and Nt doubled."""
        return SpaceTimeGrid(2 * self.Nx, 2 * self.Nt, self.T)
