"""Lower convex envelopes of sampled graphs (monotone chain)."""

import logging
from dataclasses import dataclass

import numpy as np

from dualflow.burgers_exact.potential import Potential
from dualflow.config import ENVELOPE_MAX_PERIODS, ENVELOPE_SAMPLES_PER_PERIOD
from dualflow.errors import ConsistencyError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Envelope:
    """
    Lower convex envelope of samples (x_i, f_i).

    Attributes:
        x: Sample abscissae, increasing.
        f: Sampled function.
        values: Envelope at the samples.
        vertices: Indices of the hull vertices.
        contact: Mask of samples on the hull.
        gaps: Tuples (a, b, slope) of the hull edges spanning non-contact samples.
    """

    x: np.ndarray
    f: np.ndarray
    values: np.ndarray
    vertices: np.ndarray
    contact: np.ndarray
    gaps: tuple

    def slope(self, x) -> np.ndarray:
        """Right derivative of the piecewise-linear envelope."""
        xv = self.x[self.vertices]
        fv = self.f[self.vertices]
        edge = np.clip(np.searchsorted(xv, x, side="right") - 1, 0, len(xv) - 2)
        return (fv[edge + 1] - fv[edge]) / (xv[edge + 1] - xv[edge])


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def lower_hull(x: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Indices of the lower hull of points sorted by x (monotone chain)."""
    hull = []
    for i in range(len(x)):
        while len(hull) >= 2 and _cross((x[hull[-2]], f[hull[-2]]), (x[hull[-1]], f[hull[-1]]), (x[i], f[i])) <= 0:
            hull.pop()
        hull.append(i)
    return np.array(hull, dtype=int)


def convex_envelope(x: np.ndarray, f: np.ndarray, tol: float = 1e-12) -> Envelope:
    """
    Lower convex envelope of a sampled function and its contact set.

    Args:
        x: Increasing sample points.
        f: Samples.
        tol: Contact tolerance relative to max(1, |f|).

    Returns:
        The Envelope.
    """
    x = np.asarray(x, dtype=float)
    f = np.asarray(f, dtype=float)
    if x.ndim != 1 or x.shape != f.shape or np.any(np.diff(x) <= 0):
        raise ValueError("convex_envelope needs increasing 1D samples of matching shape")
    vertices = lower_hull(x, f)
    values = np.interp(x, x[vertices], f[vertices])
    contact = f - values <= tol * np.maximum(1.0, np.abs(f))
    gaps = []
    for left, right in zip(vertices[:-1], vertices[1:]):
        if right - left > 1 and not np.all(contact[left + 1 : right]):
            slope = (f[right] - f[left]) / (x[right] - x[left])
            gaps.append((float(x[left]), float(x[right]), float(slope)))
    return Envelope(x, f, values, vertices, contact, tuple(gaps))


def quadratic_envelope(
    potential: Potential,
    T: float,
    samples: int = ENVELOPE_SAMPLES_PER_PERIOD,
    max_periods: int = ENVELOPE_MAX_PERIODS,
) -> Envelope:
    """
    Envelope of x^2 / 2 + T phi(x) around the central period [0, 1).

    Starts from a three-period window and widens by one period on each side
    while a gap touching the window boundary reaches the central period.

    Raises:
        ConsistencyError: If the widest window still touches the central period.
    """
    periods = 3
    while periods <= max_periods:
        half = (periods - 1) // 2
        x = np.arange(-half * samples, (half + 1) * samples) / samples
        envelope = convex_envelope(x, 0.5 * x**2 + T * potential(x))
        touching = [
            (a, b) for a, b, _ in envelope.gaps if (a <= x[0] or b >= x[-1]) and a < 1.0 and b > 0.0
        ]
        if not touching:
            logger.debug("envelope on %d periods: %d gaps", periods, len(envelope.gaps))
            return envelope
        logger.warning("envelope window of %d periods too small, widening", periods)
        periods += 2
    raise ConsistencyError(f"envelope gap reaches the central period on {max_periods} periods")
