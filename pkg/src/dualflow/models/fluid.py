"""Fluid-type models F(v) = v (x) v / rho + P(rho) e_0 e_0 + g(rho) e_N e_N."""

import logging

import numpy as np

from dualflow.framework.model import ModelSpec
from dualflow.framework.numerics import safeguarded_root
from dualflow.models.pressure import LogarithmicPressure, PressureLaw

logger = logging.getLogger(__name__)

# Smallest density tried by the cellwise minimization; below it the
# minimizer is reported as vacuum.
_VACUUM = 1e-14
_BRACKET_CAP = 1e12


class FluidModel(ModelSpec):
    """
    Shared pointwise structure of the barotropic, QHD and Korteweg systems.

    The density is the last component; the others are kinetic variables
    entering K through |v'|^2 / (2 rho). Subclasses provide L, L* and the
    linear constraint.
    """

    def __init__(self, pressure: PressureLaw = None, rho_min: float = None):
        if rho_min is None:
            super().__init__()
        else:
            super().__init__(rho_min)
        self.pressure = pressure or LogarithmicPressure()
        self.rho_index = self.n - 1

    # Pointwise structure

    def _split(self, v):
        v = np.asarray(v, dtype=float)
        return v, v[..., -1]

    def F(self, v: np.ndarray) -> np.ndarray:
        v, rho = self._split(v)
        out = v[..., :, None] * v[..., None, :] / rho[..., None, None]
        out[..., 0, 0] += self.pressure.P(rho)
        out[..., -1, -1] += self.pressure.g(rho)
        return out

    def dF(self, v: np.ndarray) -> np.ndarray:
        v, rho = self._split(v)
        w = v / rho[..., None]
        eye = np.eye(self.N)
        # e_l (x) w + w (x) e_l for every l
        out = eye[:, :, None] * w[..., None, None, :] + eye[:, None, :] * w[..., None, :, None]
        out[..., -1, :, :] -= w[..., :, None] * w[..., None, :]
        out[..., -1, 0, 0] += self.pressure.dP(rho)
        out[..., -1, -1, -1] += self.pressure.dg(rho)
        return out

    def K(self, v: np.ndarray) -> np.ndarray:
        v, rho = self._split(v)
        return np.sum(v[..., :-1] ** 2, axis=-1) / (2.0 * rho) + self.pressure.U(rho)

    def grad_K(self, v: np.ndarray) -> np.ndarray:
        v, rho = self._split(v)
        w = v[..., :-1] / rho[..., None]
        zeta = -0.5 * np.sum(w**2, axis=-1) + self.pressure.dU(rho)
        return np.concatenate([w, zeta[..., None]], axis=-1)

    def sharp_inverse(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        kinetic = w[..., :-1]
        rho = self.pressure.dU_inverse(w[..., -1] + 0.5 * np.sum(kinetic**2, axis=-1))
        return np.concatenate([rho[..., None] * kinetic, rho[..., None]], axis=-1)

    def in_domain(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return np.all(np.isfinite(v), axis=-1) & (v[..., -1] > 0)

    def in_interior(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return np.all(np.isfinite(v), axis=-1) & (v[..., -1] >= self.rho_min)

    def sample_states(self, rng: np.random.Generator, size: int) -> np.ndarray:
        rho = np.exp(rng.uniform(np.log(max(self.rho_min, 0.05)), np.log(4.0), size))
        kinetic = rng.standard_normal((size, self.n - 1))
        return np.concatenate([kinetic, rho[:, None]], axis=-1)

    # Dual functional

    def dual_cell_minimum(self, E: np.ndarray, S: np.ndarray):
        """
        inf over z of z.E + 1/2 F(z):S, reduced to a convex problem in rho.

        With b = E' + S[:-1, -1] the kinetic part minimizes to -rho b.S'^+ b / 2,
        leaving h(rho) = rho kappa + (S_00 P(rho) + S_NN g(rho)) / 2.
        """
        E = np.asarray(E, dtype=float)
        S = np.asarray(S, dtype=float)
        cells = E.shape[0]
        Sk = S[:, :-1, :-1]
        b = E[:, :-1] + S[:, :-1, -1]
        Sk_pinv = np.linalg.pinv(Sk, hermitian=True, rcond=1e-12)
        proj = np.einsum("cij,cj->ci", Sk_pinv, b)
        in_range = np.linalg.norm(np.einsum("cij,cj->ci", Sk, proj) - b, axis=-1) <= 1e-9 * (
            1.0 + np.linalg.norm(b, axis=-1)
        )
        kappa = E[:, -1] + 0.5 * S[:, -1, -1] - 0.5 * np.einsum("ci,ci->c", b, proj)
        s00 = S[:, 0, 0]
        snn = S[:, -1, -1]
        law = self.pressure

        def h(r):
            return r * kappa + 0.5 * (s00 * law.P(r) + snn * law.g(r))

        def dh(r):
            return kappa + 0.5 * (s00 * law.dP(r) + snn * law.dg(r))

        lo = np.full(cells, _VACUUM)
        vacuum = dh(lo) >= 0
        hi = np.ones(cells)
        while True:
            grow = ~vacuum & (dh(hi) <= 0) & (hi < _BRACKET_CAP)
            if not np.any(grow):
                break
            hi = np.where(grow, 4.0 * hi, hi)
        unbounded = ~vacuum & (dh(hi) <= 0)
        active = ~vacuum & ~unbounded
        rho = np.zeros(cells)
        if np.any(active):
            idx = np.flatnonzero(active)

            def dh_sub(r):
                return kappa[idx] + 0.5 * (s00[idx] * law.dP(r) + snn[idx] * law.dg(r))

            def d2h_sub(r):
                return 0.5 * (s00[idx] * law.d2P(r) + snn[idx] * law.d2g(r))

            root, ok = safeguarded_root(dh_sub, d2h_sub, lo[idx], hi[idx])
            if not np.all(ok):
                logger.debug("%s: %d density roots stopped at the iteration cap", self.name, int(np.sum(~ok)))
            rho[idx] = root
        values = np.where(vacuum, snn * law.U0, h(np.where(active, rho, 1.0)))
        values = np.where(unbounded | ~in_range, -np.inf, values)
        z = np.concatenate([-rho[:, None] * proj, rho[:, None]], axis=-1)
        return values, z

    def describe(self) -> dict:
        data = super().describe()
        data["pressure"] = self.pressure.describe()
        return data
