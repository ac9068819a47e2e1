"""Exponential time weights h(t) = exp(-gamma t) and their tails H(t)."""

import logging
from dataclasses import dataclass

import numpy as np

from dualflow.errors import StructuralError
from dualflow.framework.entropy import sharp
from dualflow.framework.numerics import min_eigenvalue
from dualflow.grid.spacetime import SpaceTimeGrid
from dualflow.grid.stencils import DifferenceOperators

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WeightProfile:
    """
    Weight h(t) = scale * exp(-gamma t) on [0, T] and H(t) = int_t^T h.

    Attributes:
        gamma: Adaptation rate, >= 0.
        T: Final time of the weight.
        scale: Positive constant factor (1 for the usual weights).
    """

    gamma: float
    T: float
    scale: float = 1.0

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")

    @classmethod
    def constant(cls, T: float) -> "WeightProfile":
        return cls(0.0, T)

    @classmethod
    def exponential(cls, gamma: float, T: float) -> "WeightProfile":
        return cls(float(gamma), T)

    def h(self, t) -> np.ndarray:
        return self.scale * np.exp(-self.gamma * np.asarray(t, dtype=float))

    def H(self, t) -> np.ndarray:
        """Closed-form tail integral; exactly 0 at T."""
        t = np.asarray(t, dtype=float)
        if self.gamma == 0:
            return self.scale * (self.T - t)
        # expm1 keeps small gamma (T - t) accurate
        return -self.scale * np.exp(-self.gamma * t) * np.expm1(-self.gamma * (self.T - t)) / self.gamma

    @property
    def H0(self) -> float:
        return float(self.H(0.0))

    def _match(self, grid: SpaceTimeGrid) -> None:
        if abs(grid.T - self.T) > 1e-9 * max(1.0, self.T):
            raise StructuralError(f"weight lives on [0, {self.T}], grid on [0, {grid.T}]")

    def h_samples(self, grid: SpaceTimeGrid) -> np.ndarray:
        self._match(grid)
        return self.h(grid.t)

    def H_samples(self, grid: SpaceTimeGrid) -> np.ndarray:
        self._match(grid)
        H = self.H(grid.t)
        H[-1] = 0.0
        return H

    def rescaled(self, factor: float) -> "WeightProfile":
        return WeightProfile(self.gamma, self.T, self.scale * factor)

    def check(self, grid: SpaceTimeGrid) -> None:
        """
        Verify the weight relations on the grid nodes.

        Raises:
            ValueError: If h is not bounded away from 0, H is not strictly
                decreasing, or gamma H > h somewhere.
        """
        h = self.h_samples(grid)
        H = self.H_samples(grid)
        if np.min(h) < self.scale * np.exp(-self.gamma * self.T) * (1 - 1e-12):
            raise ValueError("h drops below its lower bound")
        if np.any(np.diff(H) >= 0):
            raise ValueError("H is not strictly decreasing")
        if np.any(self.gamma * H > h * (1 + 1e-12)):
            raise ValueError("gamma H exceeds h")

    def weighted_integral(self, t: np.ndarray, samples: np.ndarray, upper: float = None) -> float:
        """
        Exact int_0^upper h(t) f(t) dt for f piecewise linear between nodes.

        Args:
            t: Increasing nodes starting at 0.
            samples: f at the nodes.
            upper: Integration end, a value in [t[0], t[-1]]; defaults to t[-1].

        Returns:
            The weighted integral.
        """
        t = np.asarray(t, dtype=float)
        f = np.asarray(samples, dtype=float)
        if t.shape != f.shape:
            raise ValueError(f"nodes {t.shape} and samples {f.shape} differ")
        if upper is not None:
            if not t[0] <= upper <= t[-1]:
                raise ValueError(f"upper={upper} outside [{t[0]}, {t[-1]}]")
            keep = t < upper
            f_up = np.interp(upper, t, f)
            t = np.append(t[keep], upper)
            f = np.append(f[keep], f_up)
        a, b = t[:-1], t[1:]
        width = b - a
        slope = np.divide(f[1:] - f[:-1], width, out=np.zeros_like(width), where=width > 0)
        g = self.gamma
        if g == 0:
            I0 = width
            I1 = 0.5 * width**2
        else:
            gh = g * width
            I0 = -np.exp(-g * a) * np.expm1(-gh) / g
            # int_0^w s exp(-g(a+s)) ds
            I1 = np.exp(-g * a) * (-np.expm1(-gh) - gh * np.exp(-gh)) / g**2
        return float(self.scale * np.sum(f[:-1] * I0 + slope * I1))

    def describe(self) -> dict:
        return {"gamma": float(self.gamma), "T": float(self.T), "scale": float(self.scale), "H0": self.H0}


def adapted_gamma(min_eigenvalue: float) -> float:
    """gamma = max(0, -2 lambda_min) making h I + 2 H S positive semidefinite."""
    return max(0.0, -2.0 * float(min_eigenvalue))


def adapt_weight(model, record, T1: float = None, order: int = None) -> WeightProfile:
    """
    Choose gamma from the most negative eigenvalue of L*(v#) on [0, T1].

    Args:
        model: The model of the record.
        record: StrongSolutionRecord on its grid.
        T1: Horizon, a node of the record's grid; defaults to the record's T.
        order: Stencil order; defaults to the record's.

    Returns:
        The WeightProfile on [0, T1].
    """
    grid = record.grid
    T1 = grid.T if T1 is None else T1
    k1 = grid.node_index(T1)
    ops = DifferenceOperators.for_grid(grid, record.order if order is None else order)
    vs = sharp(model, record.v.values[: k1 + 1])
    lam = float(np.min(min_eigenvalue(model.Lstar_apply(vs, ops))))
    gamma = adapted_gamma(lam)
    logger.info("adapted weight on [0, %g]: lambda_min=%.6g gamma=%.6g", T1, lam, gamma)
    return WeightProfile.exponential(gamma, k1 * grid.dt)
