"""1D barotropic Euler in the conservative variables (q, rho)."""

import numpy as np

from dualflow.grid.stencils import DifferenceOperators
from dualflow.models.fluid import FluidModel


class BarotropicModel(FluidModel):
    """
    dt q + dx(q^2 / rho + P(rho)) = 0, dt rho + dx q = 0.

    L(M) = (-dx M_00, -dx M_01); no linear constraint.
    """

    name = "barotropic"
    n = 2
    N = 2
    Z = 0
    labels = ("q", "rho")
    sharp_labels = ("u", "zeta")

    def L_apply(self, M: np.ndarray, ops: DifferenceOperators) -> np.ndarray:
        return np.stack([-ops.d(M[..., 0, 0]), -ops.d(M[..., 0, 1])], axis=-1)

    def Lstar_apply(self, a: np.ndarray, ops: DifferenceOperators) -> np.ndarray:
        S = np.zeros(a.shape[:-1] + (2, 2))
        S[..., 0, 0] = -ops.d_transpose(a[..., 0])
        S[..., 0, 1] = S[..., 1, 0] = -0.5 * ops.d_transpose(a[..., 1])
        return S

    def from_primitive(self, q: np.ndarray, rho: np.ndarray, ops: DifferenceOperators = None) -> np.ndarray:
        return np.stack([np.asarray(q, dtype=float), np.asarray(rho, dtype=float)], axis=-1)

    def sharp_rhs(self, w: np.ndarray, ops: DifferenceOperators) -> np.ndarray:
        """Right-hand side of the sharp system dt u = -2u dx u - dx zeta, dt zeta = (u^2 - P'(rho)) dx u."""
        u, zeta = w[..., 0], w[..., 1]
        rho = self.sharp_inverse(w)[..., 1]
        du = ops.d(u)
        return np.stack([-2.0 * u * du - ops.d(zeta), (u * u - self.pressure.dP(rho)) * du], axis=-1)
