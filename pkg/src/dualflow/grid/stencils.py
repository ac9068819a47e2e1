"""Circulant difference stencils with exact transposes."""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sparse

KINDS = ("d/dx", "d2/dx2", "identity", "mean")

_FIRST_TAPS = {
    2: ((-1, -0.5), (1, 0.5)),
    4: ((-2, 1.0 / 12.0), (-1, -2.0 / 3.0), (1, 2.0 / 3.0), (2, -1.0 / 12.0)),
}
_SECOND_TAPS = {
    2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
    4: ((-2, -1.0 / 12.0), (-1, 4.0 / 3.0), (0, -2.5), (1, 4.0 / 3.0), (2, -1.0 / 12.0)),
}


@dataclass(frozen=True)
class StencilOperator:
    """
    Periodic stencil (S a)_i = sum over taps of c * a_{i + offset}.

    Attributes:
        kind: One of "d/dx", "d2/dx2", "identity", "mean".
        order: Accuracy order (2 or 4; nominal for identity and mean).
        taps: Tuple of (offset, coefficient), coefficients already scaled by dx.
        size: Number of cells the operator acts on.
    """

    kind: str
    order: int
    taps: tuple
    size: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown stencil kind {self.kind!r}")

    def apply(self, field: np.ndarray, axis: int = -1) -> np.ndarray:
        """Apply along one axis of a periodic field."""
        field = np.asarray(field, dtype=float)
        if field.shape[axis] != self.size:
            raise ValueError(f"axis {axis} has length {field.shape[axis]}, stencil expects {self.size}")
        if self.kind == "mean":
            return np.broadcast_to(field.mean(axis=axis, keepdims=True), field.shape).copy()
        out = np.zeros_like(field)
        taps = dict(self.taps)
        for offset in sorted(taps):
            coef = taps[offset]
            if offset < 0 and taps.get(-offset) == -coef:
                continue
            if offset > 0 and taps.get(-offset) == -coef:
                # antisymmetric pair; annihilates constants exactly
                out += coef * (np.roll(field, -offset, axis=axis) - np.roll(field, offset, axis=axis))
            else:
                out += coef * np.roll(field, -offset, axis=axis)
        return out

    def transpose(self) -> "StencilOperator":
        """Exact transpose of the circulant matrix."""
        taps = tuple((-offset, coef) for offset, coef in self.taps)
        return StencilOperator(self.kind, self.order, taps, self.size)

    def apply_transpose(self, field: np.ndarray, axis: int = -1) -> np.ndarray:
        return self.transpose().apply(field, axis=axis)

    def matrix(self) -> sparse.csr_matrix:
        """Sparse circulant matrix; coinciding offsets (small sizes) are summed."""
        n = self.size
        rows, cols, vals = [], [], []
        for offset, coef in self.taps:
            idx = np.arange(n)
            rows.append(idx)
            cols.append((idx + offset) % n)
            vals.append(np.full(n, coef))
        return sparse.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
        ).tocsr()


def derivative(n: int, dx: float, order: int = 2) -> StencilOperator:
    """Centered first derivative (antisymmetric)."""
    if order not in _FIRST_TAPS:
        raise ValueError(f"order must be one of {sorted(_FIRST_TAPS)}, got {order}")
    taps = tuple((o, c / dx) for o, c in _FIRST_TAPS[order])
    return StencilOperator("d/dx", order, taps, n)


def second_derivative(n: int, dx: float, order: int = 2) -> StencilOperator:
    """Centered compact second derivative (symmetric)."""
    if order not in _SECOND_TAPS:
        raise ValueError(f"order must be one of {sorted(_SECOND_TAPS)}, got {order}")
    taps = tuple((o, c / dx**2) for o, c in _SECOND_TAPS[order])
    return StencilOperator("d2/dx2", order, taps, n)


def identity(n: int) -> StencilOperator:
    return StencilOperator("identity", 2, ((0, 1.0),), n)


def mean(n: int) -> StencilOperator:
    """Spatial mean broadcast to every cell."""
    return StencilOperator("mean", 2, tuple((o, 1.0 / n) for o in range(n)), n)


def apply_stencil(op: StencilOperator, field: np.ndarray, axis: int = -1) -> np.ndarray:
    """Circulant application of a stencil along one axis."""
    return op.apply(field, axis=axis)


def adjointness_check(op: StencilOperator, pairs: int = 10, seed: int = 0) -> float:
    """
    Worst relative defect of <S a, psi> = <a, S^T psi> over random pairs.

    Args:
        op: Stencil to test.
        pairs: Number of random field pairs.
        seed: Seed for the random generator.

    Returns:
        max |<S a, psi> - <a, S^T psi>| / (|a| |psi|).
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(pairs):
        a = rng.standard_normal(op.size)
        psi = rng.standard_normal(op.size)
        lhs = np.dot(op.apply(a), psi)
        rhs = np.dot(a, op.apply_transpose(psi))
        worst = max(worst, abs(lhs - rhs) / (np.linalg.norm(a) * np.linalg.norm(psi)))
    return float(worst)


@dataclass(frozen=True)
class DifferenceOperators:
    """
    The stencils a model needs on one grid.

    `dd` is the composition of two first derivatives; it keeps the discrete
    identities between L, L* and the linear constraint exact.
    """

    first: StencilOperator
    second: StencilOperator
    average: StencilOperator

    @classmethod
    def build(cls, n: int, dx: float, order: int = 2) -> "DifferenceOperators":
        return cls(derivative(n, dx, order), second_derivative(n, dx, order), mean(n))

    @classmethod
    def for_grid(cls, grid, order: int = 2) -> "DifferenceOperators":
        return cls.build(grid.Nx, grid.dx, order)

    @property
    def size(self) -> int:
        return self.first.size

    @property
    def order(self) -> int:
        return self.first.order

    def d(self, a: np.ndarray) -> np.ndarray:
        return self.first.apply(a)

    def dd(self, a: np.ndarray) -> np.ndarray:
        return self.first.apply(self.first.apply(a))

    def d2(self, a: np.ndarray) -> np.ndarray:
        return self.second.apply(a)

    def mean(self, a: np.ndarray) -> np.ndarray:
        return self.average.apply(a)

    def d_transpose(self, a: np.ndarray) -> np.ndarray:
        return self.first.apply_transpose(a)

    def dd_transpose(self, a: np.ndarray) -> np.ndarray:
        return self.first.apply_transpose(self.first.apply_transpose(a))
