"""1D Euler-Korteweg with power-law capillarity, augmented with xi = rho^nu."""

import numpy as np

from dualflow.errors import ConfigError
from dualflow.grid.stencils import DifferenceOperators
from dualflow.models.fluid import FluidModel
from dualflow.models.pressure import PowerPressure, PressureLaw


class KortewegModel(FluidModel):
    """
    State (q, G, xi, rho) with xi = rho^nu, nu = (s + 3) / 2, and lc v = dx xi - G.

    The zero-order couplings (nu - 1) M_01 act on off-diagonal entries only,
    so L(I) = 0.
    """

    name = "korteweg"
    n = 4
    N = 4
    Z = 1
    labels = ("q", "G", "xi", "rho")
    sharp_labels = ("u", "lambda", "mu", "zeta")

    def __init__(self, s: float = -0.5, pressure: PressureLaw = None, rho_min: float = None):
        if not -1 < s <= 1:
            raise ConfigError(f"capillarity exponent s must lie in (-1, 1], got {s}", section="model", key="s")
        super().__init__(pressure or PowerPressure.capillary(s), rho_min)
        self.s = float(s)
        self.nu = (self.s + 3.0) / 2.0

    def L_apply(self, M: np.ndarray, ops: DifferenceOperators) -> np.ndarray:
        nu = self.nu
        q = -ops.d(M[..., 0, 0]) - nu * ops.d(M[..., 1, 1]) - (nu - 1) * ops.d(M[..., 2, 2]) + nu * ops.dd(M[..., 1, 2])
        G = -nu * ops.dd(M[..., 0, 2]) + (nu - 1) * ops.d(M[..., 0, 1])
        xi = -nu * ops.d(M[..., 0, 2]) + (nu - 1) * M[..., 0, 1]
        rho = -ops.d(M[..., 0, 3])
        return np.stack([q, G, xi, rho], axis=-1)

    def Lstar_apply(self, a: np.ndarray, ops: DifferenceOperators) -> np.ndarray:
        nu = self.nu
        eta, ups, p, theta = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
        deta = ops.d_transpose(eta)
        S = np.zeros(a.shape[:-1] + (4, 4))
        S[..., 0, 0] = -deta
        S[..., 1, 1] = -nu * deta
        S[..., 2, 2] = -(nu - 1) * deta
        S[..., 1, 2] = S[..., 2, 1] = 0.5 * nu * ops.dd_transpose(eta)
        S[..., 0, 2] = S[..., 2, 0] = 0.5 * (-nu * ops.dd_transpose(ups) - nu * ops.d_transpose(p))
        S[..., 0, 1] = S[..., 1, 0] = 0.5 * (nu - 1) * (ops.d_transpose(ups) + p)
        S[..., 0, 3] = S[..., 3, 0] = -0.5 * ops.d_transpose(theta)
        return S

    def lc_apply(self, v: np.ndarray, ops: DifferenceOperators) -> np.ndarray:
        return (ops.d(v[..., 2]) - v[..., 1])[..., None]

    def lcstar_apply(self, eta: np.ndarray, ops: DifferenceOperators) -> np.ndarray:
        eta = eta[..., 0]
        zero = np.zeros_like(eta)
        return np.stack([zero, -eta, ops.d_transpose(eta), zero], axis=-1)

    def from_primitive(self, q: np.ndarray, rho: np.ndarray, ops: DifferenceOperators) -> np.ndarray:
        """State with xi = rho^nu and G = dx xi on the given stencils."""
        q = np.asarray(q, dtype=float)
        rho = np.asarray(rho, dtype=float)
        xi = rho**self.nu
        return np.stack([q, ops.d(xi), xi, rho], axis=-1)

    def describe(self) -> dict:
        data = super().describe()
        data.update({"s": self.s, "nu": self.nu})
        return data
