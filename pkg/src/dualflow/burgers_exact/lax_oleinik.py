"""Entropy solutions of Burgers' equation from the Hopf-Lax minimization."""

import logging

import numpy as np

from dualflow.burgers_exact.potential import Potential
from dualflow.config import ENVELOPE_SAMPLES_PER_PERIOD
from dualflow.framework.numerics import safeguarded_root
from dualflow.models.initial_data import TrigSeries

logger = logging.getLogger(__name__)

_CHUNK = 256


def hopf_lax_minimizer(potential: Potential, t: float, x: np.ndarray, samples: int = ENVELOPE_SAMPLES_PER_PERIOD) -> np.ndarray:
    """
    y*(t, x) minimizing (x - y)^2 / (2t) + phi(y) over the real line.

    A dense scan over |x - y| <= sqrt(2 t osc phi) picks the global basin
    (first index on ties, i.e. the smallest y); a safeguarded Newton step on
    y + t phi'(y) = x then polishes the minimizer inside its scan cell.

    Args:
        potential: The periodic potential.
        t: Positive time.
        x: Evaluation points.
        samples: Scan points per unit length.

    Returns:
        Minimizers, same shape as x.
    """
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    reach = np.sqrt(2.0 * t * potential.oscillation()) + 2.0 / samples
    offsets = np.linspace(-reach, reach, max(3, int(np.ceil(2 * reach * samples)) + 1))
    step = offsets[1] - offsets[0]
    y_star = np.empty_like(flat)
    for start in range(0, flat.size, _CHUNK):
        xs = flat[start : start + _CHUNK, None]
        ys = xs + offsets[None, :]
        cost = (xs - ys) ** 2 / (2.0 * t) + potential(ys)
        y_star[start : start + _CHUNK] = ys[np.arange(len(xs)), np.argmin(cost, axis=1)]

    def stationarity(y):
        return (y - flat) / t + potential.derivative(y)

    def curvature(y):
        return 1.0 / t + potential.second_derivative(y)

    lo, hi = y_star - step, y_star + step
    bracketed = (stationarity(lo) <= 0) & (stationarity(hi) >= 0)
    if np.any(bracketed):
        root, _ = safeguarded_root(stationarity, curvature, np.where(bracketed, lo, y_star), np.where(bracketed, hi, y_star))
        y_star = np.where(bracketed, root, y_star)
    return y_star.reshape(x.shape)


def entropy_solution(v0: TrigSeries, t: float, x: np.ndarray, samples: int = ENVELOPE_SAMPLES_PER_PERIOD) -> np.ndarray:
    """
    The entropy solution v(t, x) = (x - y*(t, x)) / t of Burgers' equation.

    Args:
        v0: Zero-mean periodic datum.
        t: Time, >= 0; v0 itself at t = 0.
        x: Evaluation points.
        samples: Scan points per unit length.

    Returns:
        v(t, x), same shape as x.

    Raises:
        PreconditionError: If v0 does not have zero mean.
    """
    potential = Potential(v0)
    x = np.asarray(x, dtype=float)
    if t == 0:
        return v0(x)
    if not v0.terms:
        return np.zeros_like(x)
    return (x - hopf_lax_minimizer(potential, t, x, samples)) / t
