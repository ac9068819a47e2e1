"""Inviscid Burgers equation dt v + dx(v^2 / 2) = 0 with zero mean."""

import numpy as np

from dualflow.framework.model import ModelSpec
from dualflow.grid.stencils import DifferenceOperators


class BurgersModel(ModelSpec):
    """
    F(v) = v^2, K(v) = v^2 / 2, L = -dx / 2, and lc v = mean(v).

    The constraint field has one component per cell holding the spatial mean.
    """

    name = "burgers"
    n = 1
    N = 1
    Z = 1
    labels = ("v",)
    sharp_labels = ("v",)
    scalar_quadratic = True

    def F(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return (v * v)[..., None]

    def dF(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return (2.0 * v)[..., None, None]

    def K(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return 0.5 * v[..., 0] ** 2

    def grad_K(self, v: np.ndarray) -> np.ndarray:
        return np.array(v, dtype=float)

    def sharp_inverse(self, w: np.ndarray) -> np.ndarray:
        return np.array(w, dtype=float)

    def L_apply(self, M: np.ndarray, ops: DifferenceOperators) -> np.ndarray:
        return (-0.5 * ops.d(M[..., 0, 0]))[..., None]

    def Lstar_apply(self, a: np.ndarray, ops: DifferenceOperators) -> np.ndarray:
        return (-0.5 * ops.d_transpose(a[..., 0]))[..., None, None]

    def lc_apply(self, v: np.ndarray, ops: DifferenceOperators) -> np.ndarray:
        return ops.mean(v[..., 0])[..., None]

    def lcstar_apply(self, eta: np.ndarray, ops: DifferenceOperators) -> np.ndarray:
        return ops.mean(eta[..., 0])[..., None]

    def dual_cell_minimum(self, E: np.ndarray, S: np.ndarray):
        """inf_z z E + z^2 S / 2 = -E^2 / (2S); -inf when S vanishes and E does not."""
        E = np.asarray(E, dtype=float)[:, 0]
        S = np.asarray(S, dtype=float)[:, 0, 0]
        degenerate = S <= 1e-14 * np.maximum(1.0, np.abs(E))
        safe = np.where(degenerate, 1.0, S)
        values = np.where(degenerate, np.where(E == 0, 0.0, -np.inf), -0.5 * E**2 / safe)
        z = np.where(degenerate, 0.0, -E / safe)
        return values, z[:, None]

    def sample_states(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.standard_normal((size, 1))
