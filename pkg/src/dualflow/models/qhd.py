"""1D quantum hydrodynamics, augmented with G = dx rho."""

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve

from dualflow.grid.stencils import DifferenceOperators
from dualflow.models.fluid import FluidModel


class QhdModel(FluidModel):
    """
    State (q, G, rho) with the constraint lc v = dx rho - G.

    L(M) = (-dx M_00 - dx M_11 + dxx M_12, -dxx M_02, -dx M_02), where dxx is
    the square of the first-derivative stencil so that lc L = 0 holds exactly.
    """

    name = "qhd"
    n = 3
    N = 3
    Z = 1
    labels = ("q", "G", "rho")
    sharp_labels = ("u", "lambda", "zeta")

    def L_apply(self, M: np.ndarray, ops: DifferenceOperators) -> np.ndarray:
        q = -ops.d(M[..., 0, 0]) - ops.d(M[..., 1, 1]) + ops.dd(M[..., 1, 2])
        G = -ops.dd(M[..., 0, 2])
        rho = -ops.d(M[..., 0, 2])
        return np.stack([q, G, rho], axis=-1)

    def Lstar_apply(self, a: np.ndarray, ops: DifferenceOperators) -> np.ndarray:
        eta, ups, theta = a[..., 0], a[..., 1], a[..., 2]
        S = np.zeros(a.shape[:-1] + (3, 3))
        S[..., 0, 0] = S[..., 1, 1] = -ops.d_transpose(eta)
        S[..., 1, 2] = S[..., 2, 1] = 0.5 * ops.dd_transpose(eta)
        S[..., 0, 2] = S[..., 2, 0] = 0.5 * (-ops.dd_transpose(ups) - ops.d_transpose(theta))
        return S

    def lc_apply(self, v: np.ndarray, ops: DifferenceOperators) -> np.ndarray:
        return (ops.d(v[..., 2]) - v[..., 1])[..., None]

    def lcstar_apply(self, eta: np.ndarray, ops: DifferenceOperators) -> np.ndarray:
        eta = eta[..., 0]
        return np.stack([np.zeros_like(eta), -eta, ops.d_transpose(eta)], axis=-1)

    def multiplier(self, R: np.ndarray, ops: DifferenceOperators) -> np.ndarray:
        """
        pi = -(dt lambda + 2 lambda dx u + dxx u), read off the G row of the defect.

        The G row of lc* is -pi, so no solve is needed in one dimension.
        """
        return -np.asarray(R, dtype=float)[..., 1:2]

    def from_primitive(self, q: np.ndarray, rho: np.ndarray, ops: DifferenceOperators) -> np.ndarray:
        """Constraint-consistent state with G = dx rho on the given stencils."""
        q = np.asarray(q, dtype=float)
        rho = np.asarray(rho, dtype=float)
        return np.stack([q, ops.d(rho), rho], axis=-1)

    def sharp_jacobian(self, w: np.ndarray) -> np.ndarray:
        """dv/dw = rho diag(1, 1, 0) + a (x) a / U''(rho) with a = (u, lambda, 1)."""
        w = np.asarray(w, dtype=float)
        rho = self.sharp_inverse(w)[..., 2]
        a = np.concatenate([w[..., :2], np.ones_like(rho)[..., None]], axis=-1)
        J = a[..., :, None] * a[..., None, :] / self.pressure.d2U(rho)[..., None, None]
        J[..., 0, 0] += rho
        J[..., 1, 1] += rho
        return J

    def sharp_multiplier(self, w: np.ndarray, free: np.ndarray, ops: DifferenceOperators) -> np.ndarray:
        """
        pi keeping dx rho - G stationary along dt w = free + lc* pi.

        Solves lc J lc* pi = -lc J free with J the sharp Jacobian; the normal
        matrix is positive definite since lc* is injective.
        """
        size = w.shape[0]
        eye = sparse.identity(size, format="csr")
        # columns of the flattened (size, 3) slice, component-interleaved
        pick = [sparse.kron(eye, np.eye(1, 3, c)) for c in range(3)]
        lc = (ops.first.matrix() @ pick[2] - pick[1]).tocsr()
        J = sparse.block_diag(list(self.sharp_jacobian(w)), format="csr")
        normal = (lc @ J @ lc.T).tocsc()
        pi = spsolve(normal, -(lc @ (J @ np.asarray(free, dtype=float).ravel())))
        return np.asarray(pi)[:, None]

    def sharp_rhs(self, w: np.ndarray, ops: DifferenceOperators) -> np.ndarray:
        """
        Right-hand side of the sharp system in (u, lambda, zeta):

            dt u      = -2u dx u + dxx lambda - dx zeta
            dt lambda = -2 lambda dx u - dxx u - pi
            dt zeta   = (u^2 + lambda^2 - P'(rho)) dx u - dx pi

        with rho = (U')^-1(zeta + (u^2 + lambda^2) / 2) and pi the multiplier
        of dx rho = rho lambda.
        """
        w = np.asarray(w, dtype=float)
        v = self.sharp_inverse(w)
        free = -np.einsum("...ij,...lij->...l", self.Lstar_apply(w, ops), self.dF(v))
        return free + self.lcstar_apply(self.sharp_multiplier(w, free, ops), ops)
