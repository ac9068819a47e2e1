"""Abstract description of a conservative system dt v = L(F(v)), lc v = 0."""

import logging
from abc import ABC, abstractmethod

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from dualflow.config import PSD_TOLERANCE, RHO_MIN
from dualflow.errors import ConsistencyError, DomainError
from dualflow.grid.stencils import DifferenceOperators

logger = logging.getLogger(__name__)


class ModelSpec(ABC):
    """
    A PDE system in abstract form.

    Pointwise maps (F, dF, K, grad_K, sharp_inverse) act on arrays of shape
    (..., n). Differential maps (L_apply, Lstar_apply, lc_apply, lcstar_apply)
    act on one or more spatial slices: the cell axis is the one just before
    the component axes, e.g. (..., Nx, n) or (..., Nx, N, N).

    Instances are immutable after construction.
    """

    name = "abstract"
    n = 0
    N = 0
    Z = 0
    labels = ()
    sharp_labels = ()
    rho_index = None
    scalar_quadratic = False

    def __init__(self, rho_min: float = RHO_MIN):
        if not rho_min > 0:
            raise ValueError(f"rho_min must be positive, got {rho_min}")
        self.rho_min = float(rho_min)

    # Pointwise structure

    @abstractmethod
    def F(self, v: np.ndarray) -> np.ndarray:
        """Matrix flux F(v), shape (..., N, N)."""

    @abstractmethod
    def dF(self, v: np.ndarray) -> np.ndarray:
        """Partial derivatives dF/dv_l stacked on axis -3, shape (..., n, N, N)."""

    def K(self, v: np.ndarray) -> np.ndarray:
        """Entropy density 1/2 tr F(v)."""
        return 0.5 * np.trace(self.F(v), axis1=-2, axis2=-1)

    @abstractmethod
    def grad_K(self, v: np.ndarray) -> np.ndarray:
        """The sharp map v -> v#."""

    @abstractmethod
    def sharp_inverse(self, w: np.ndarray) -> np.ndarray:
        """Inverse of the sharp map on its image."""

    def in_domain(self, v: np.ndarray) -> np.ndarray:
        return np.all(np.isfinite(v), axis=-1)

    def in_interior(self, v: np.ndarray) -> np.ndarray:
        return self.in_domain(v)

    def check_domain(self, v: np.ndarray, interior: bool = False) -> None:
        """
        Raise DomainError naming the first cell outside dom F (or its interior).

        Raises:
            DomainError: If any sample lies outside.
        """
        inside = self.in_interior(v) if interior else self.in_domain(v)
        if not np.all(inside):
            cell = tuple(int(i) for i in np.argwhere(~inside)[0])
            where = "interior of dom F" if interior else "dom F"
            raise DomainError(f"{self.name}: state at cell {cell} lies outside the {where}", cell=cell)

    # Linear structure

    @abstractmethod
    def L_apply(self, M: np.ndarray, ops: DifferenceOperators) -> np.ndarray:
        """L acting on matrix slices (..., Nx, N, N) -> (..., Nx, n)."""

    @abstractmethod
    def Lstar_apply(self, a: np.ndarray, ops: DifferenceOperators) -> np.ndarray:
        """Exact transpose of L under the full Frobenius pairing, (..., Nx, n) -> (..., Nx, N, N)."""

    def lc_apply(self, v: np.ndarray, ops: DifferenceOperators) -> np.ndarray:
        """Linear constraint, (..., Nx, n) -> (..., Nx, Z)."""
        return np.zeros(np.shape(v)[:-1] + (self.Z,))

    def lcstar_apply(self, eta: np.ndarray, ops: DifferenceOperators) -> np.ndarray:
        """Transpose of the linear constraint, (..., Nx, Z) -> (..., Nx, n)."""
        return np.zeros(np.shape(eta)[:-1] + (self.n,))

    def multiplier(self, R: np.ndarray, ops: DifferenceOperators):
        """
        Least-squares multiplier pi with lc*(pi) closest to R, slab by slab.

        Solves (lc lc*) pi = lc R with conjugate gradients.

        Args:
            R: Sharp-equation defect, shape (..., Nx, n).
            ops: Stencils of the grid.

        Returns:
            pi of shape (..., Nx, Z), or None when Z = 0.
        """
        if self.Z == 0:
            return None
        return range_coefficients(self, R, ops)

    # Dual functional

    @abstractmethod
    def dual_cell_minimum(self, E: np.ndarray, S: np.ndarray):
        """
        Cellwise inf over z in dom F of z.E + 1/2 F(z):S for S positive semidefinite.

        Args:
            E: Shape (cells, n).
            S: Shape (cells, N, N), positive semidefinite.

        Returns:
            Tuple (values, minimizers); values are -inf where the infimum is unbounded.
        """

    # Sampling and self-checks

    @abstractmethod
    def sample_states(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Random states in the interior of dom F (rho >= rho_min)."""

    def identity_field(self, Nx: int) -> np.ndarray:
        return np.broadcast_to(np.eye(self.N), (Nx, self.N, self.N)).copy()

    def check_derivatives(self, samples: int = 8, eps: float = 1e-6, seed: int = 0, rtol: float = 1e-5) -> None:
        """
        Cross-validate dF and grad_K against centered finite differences.

        Raises:
            ConsistencyError: If the analytic derivatives disagree.
        """
        rng = np.random.default_rng(seed)
        v = self.sample_states(rng, samples)
        dF = self.dF(v)
        gK = self.grad_K(v)
        for l in range(self.n):
            step = np.zeros(self.n)
            step[l] = eps
            fd_F = (self.F(v + step) - self.F(v - step)) / (2 * eps)
            fd_K = (self.K(v + step) - self.K(v - step)) / (2 * eps)
            scale_F = 1.0 + np.max(np.abs(fd_F))
            scale_K = 1.0 + np.max(np.abs(fd_K))
            if np.max(np.abs(fd_F - dF[..., l, :, :])) > rtol * scale_F:
                raise ConsistencyError(f"{self.name}: dF/dv_{l} disagrees with finite differences")
            if np.max(np.abs(fd_K - gK[..., l])) > rtol * scale_K:
                raise ConsistencyError(f"{self.name}: dK/dv_{l} disagrees with finite differences")

    def check_psd(self, v: np.ndarray) -> float:
        """Most negative relative eigenvalue of F(v) over the samples."""
        F = self.F(v)
        lam = np.linalg.eigvalsh(F)
        scale = np.maximum(1.0, np.abs(lam).max(axis=-1))
        return float(np.min(lam[..., 0] / scale))

    def describe(self) -> dict:
        return {"name": self.name, "n": self.n, "N": self.N, "Z": self.Z, "rho_min": self.rho_min}

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.describe()})"


def psd_floor(model: ModelSpec, v: np.ndarray) -> bool:
    """True when F(v) passes the eigenvalue floor of the PSD invariant."""
    return model.check_psd(v) >= -PSD_TOLERANCE


def range_coefficients(model: ModelSpec, R: np.ndarray, ops: DifferenceOperators) -> np.ndarray:
    """
    Least-squares eta with lc*(eta) closest to R, slab by slab.

    Solves (lc lc*) eta = lc R with conjugate gradients on each spatial slice.

    Args:
        model: ModelSpec with Z > 0.
        R: Array of shape (..., Nx, n).
        ops: Stencils of the grid.

    Returns:
        eta of shape (..., Nx, Z).
    """
    R = np.asarray(R, dtype=float)
    Nx = R.shape[-2]
    size = Nx * model.Z

    def normal_matvec(x):
        return model.lc_apply(model.lcstar_apply(x.reshape(Nx, model.Z), ops), ops).ravel()

    normal = LinearOperator((size, size), matvec=normal_matvec, dtype=float)
    flat = R.reshape(-1, Nx, model.n)
    out = np.empty((flat.shape[0], Nx, model.Z))
    for k, slab in enumerate(flat):
        rhs = model.lc_apply(slab, ops).ravel()
        if not np.any(rhs):
            out[k] = 0.0
            continue
        eta, info = cg(normal, rhs, rtol=1e-12, atol=0.0, maxiter=10 * size)
        if info != 0:
            logger.warning("%s: range solve stopped with info=%d on slab %d", model.name, info, k)
        out[k] = eta.reshape(Nx, model.Z)
    return out.reshape(R.shape[:-1] + (model.Z,))
