"""Vectorized cellwise numerics shared by the solver and the exact modules."""

import numpy as np


def symmetric_eig(a: np.ndarray):
    """Batched eigen-decomposition of symmetric matrices over the last two axes."""
    return np.linalg.eigh(0.5 * (a + np.swapaxes(a, -1, -2)))


def min_eigenvalue(a: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh(0.5 * (a + np.swapaxes(a, -1, -2)))[..., 0]


def psd_part(a: np.ndarray) -> np.ndarray:
    """Projection onto the positive semidefinite cone (Frobenius norm)."""
    lam, vec = symmetric_eig(a)
    return np.einsum("...ij,...j,...kj->...ik", vec, np.maximum(lam, 0.0), vec)


def frobenius(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """A : B over the last two axes."""
    return np.einsum("...ij,...ij->...", a, b)


def safeguarded_root(fun, dfun, lo, hi, tol: float = 1e-12, max_iterations: int = 200):
    """
    Root of increasing functions on brackets, Newton steps safeguarded by bisection.

    Args:
        fun: Vectorized function with fun(lo) <= 0 <= fun(hi).
        dfun: Its derivative.
        lo: Lower bracket ends.
        hi: Upper bracket ends.
        tol: Bracket width tolerance relative to max(1, |x|).
        max_iterations: Iteration cap.

    Returns:
        Tuple (roots, converged mask).
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    x = 0.5 * (lo + hi)
    converged = np.zeros(x.shape, dtype=bool)
    for _ in range(max_iterations):
        f = fun(x)
        lo = np.where(f <= 0, x, lo)
        hi = np.where(f > 0, x, hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = x - f / dfun(x)
        inside = np.isfinite(step) & (step > lo) & (step < hi)
        x_new = np.where(inside, step, 0.5 * (lo + hi))
        x_new = np.where(f == 0, x, x_new)
        converged = (np.abs(x_new - x) <= tol * np.maximum(1.0, np.abs(x))) | (hi - lo <= tol * np.maximum(1.0, np.abs(x)))
        x = x_new
        if np.all(converged):
            break
    return x, converged
