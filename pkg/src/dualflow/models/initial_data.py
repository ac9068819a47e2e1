"""Truncated trigonometric series on the unit torus."""

from dataclasses import dataclass

import numpy as np

from dualflow.errors import ConfigError

KINDS = ("sin", "cos")


@dataclass(frozen=True)
class TrigTerm:
    """amplitude * kind(2 pi frequency x + phase)."""

    kind: str
    frequency: int
    amplitude: float = 1.0
    phase: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown trig kind {self.kind!r}", section="scenario", key="v0")
        if int(self.frequency) != self.frequency or self.frequency < 0:
            raise ConfigError(f"frequency must be a nonnegative integer, got {self.frequency}", section="scenario", key="v0")

    def _arg(self, x):
        return 2 * np.pi * self.frequency * np.asarray(x, dtype=float) + self.phase

    def value(self, x):
        f = np.sin if self.kind == "sin" else np.cos
        return self.amplitude * f(self._arg(x))

    def derivative(self, x):
        k = 2 * np.pi * self.frequency
        if self.kind == "sin":
            return self.amplitude * k * np.cos(self._arg(x))
        return -self.amplitude * k * np.sin(self._arg(x))

    def second_derivative(self, x):
        k = 2 * np.pi * self.frequency
        return -(k**2) * self.value(x)

    def antiderivative(self, x):
        if self.frequency == 0:
            raise ConfigError("a constant term has no periodic antiderivative", section="scenario", key="v0")
        k = 2 * np.pi * self.frequency
        if self.kind == "sin":
            return -self.amplitude * np.cos(self._arg(x)) / k
        return self.amplitude * np.sin(self._arg(x)) / k

    def mean(self) -> float:
        if self.frequency:
            return 0.0
        return float(self.value(0.0))


@dataclass(frozen=True)
class TrigSeries:
    """Finite sum of TrigTerms; the empty series is the zero function."""

    terms: tuple = ()

    @classmethod
    def parse(cls, text: str) -> "TrigSeries":
        """
        Parse "kind:frequency[:amplitude[:phase]]" terms joined by "+".

        "0" and the empty string give the zero series.

        Raises:
            ConfigError: On malformed terms.
        """
        text = (text or "").strip()
        if text in ("", "0"):
            return cls(())
        terms = []
        for chunk in text.split("+"):
            parts = [p.strip() for p in chunk.strip().split(":")]
            if len(parts) < 2 or len(parts) > 4:
                raise ConfigError(f"malformed trig term {chunk!r}", section="scenario", key="v0")
            try:
                numbers = [float(p) for p in parts[1:]]
            except ValueError as exc:
                raise ConfigError(f"malformed trig term {chunk!r}", section="scenario", key="v0") from exc
            terms.append(TrigTerm(parts[0], int(numbers[0]), *numbers[1:]))
        return cls(tuple(terms))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return "+".join(f"{t.kind}:{t.frequency}:{t.amplitude:g}:{t.phase:g}" for t in self.terms)

    def scaled(self, factor: float) -> "TrigSeries":
        return TrigSeries(tuple(TrigTerm(t.kind, t.frequency, factor * t.amplitude, t.phase) for t in self.terms))

    def _sum(self, method: str, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for term in self.terms:
            out = out + getattr(term, method)(x)
        return out

    def __call__(self, x):
        return self._sum("value", x)

    def derivative(self, x):
        return self._sum("derivative", x)

    def second_derivative(self, x):
        return self._sum("second_derivative", x)

    def antiderivative(self, x):
        return self._sum("antiderivative", x)

    def mean(self) -> float:
        return float(sum(t.mean() for t in self.terms))

    @property
    def max_frequency(self) -> int:
        return max((t.frequency for t in self.terms), default=0)

    def min_derivative(self, samples: int = 65536) -> float:
        """Minimum of the derivative over one period, from a dense scan."""
        if not self.terms:
            return 0.0
        x = np.arange(samples) / samples
        return float(np.min(self.derivative(x)))
