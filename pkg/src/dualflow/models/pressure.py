"""Internal energies U and the derived pressure P and trace term g (d = 1)."""

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from dualflow.errors import ConfigError


class PressureLaw(ABC):
    """
    Convex internal energy U with P(y) = U'(y) y - U(y) + U(0) and g = 2U - P - y.

    Subclasses supply U and its first three derivatives plus the inverse of U'.
    """

    name = "abstract"

    @abstractmethod
    def U(self, y):
        ...

    @abstractmethod
    def dU(self, y):
        ...

    @abstractmethod
    def d2U(self, y):
        ...

    @abstractmethod
    def d3U(self, y):
        ...

    @abstractmethod
    def dU_inverse(self, s):
        """(U')^{-1}; nan where s is outside the range of U'."""

    @property
    def U0(self) -> float:
        return float(self.U(0.0))

    def P(self, y):
        y = np.asarray(y, dtype=float)
        return self.dU(y) * y - self.U(y) + self.U0

    def dP(self, y):
        return self.d2U(y) * y

    def d2P(self, y):
        return self.d3U(y) * y + self.d2U(y)

    def g(self, y):
        y = np.asarray(y, dtype=float)
        return 2.0 * self.U(y) - self.P(y) - y

    def dg(self, y):
        return 2.0 * self.dU(y) - self.dP(y) - 1.0

    def d2g(self, y):
        return 2.0 * self.d2U(y) - self.d2P(y)

    def validate(self, lo: float = 1e-6, hi: float = 1e3, samples: int = 2001) -> None:
        """
        Scan (lo, hi) for the positivity of P and g and the convexity of U.

        Raises:
            ConfigError: If a normalization makes F indefinite.
        """
        y = np.geomspace(lo, hi, samples)
        scale = np.maximum(1.0, np.abs(self.U(y)))
        if np.min(self.P(y) / scale) < -1e-12:
            raise ConfigError(f"{self.name}: pressure becomes negative", section="model")
        if np.min(self.g(y) / scale) < -1e-10:
            raise ConfigError(
                f"{self.name}: 2U - P - y becomes negative (min {np.min(self.g(y)):.3e}); adjust the normalization",
                section="model",
            )
        if np.min(self.d2U(y)) <= 0:
            raise ConfigError(f"{self.name}: U is not strictly convex", section="model")

    @abstractmethod
    def describe(self) -> dict:
        ...


@dataclass(frozen=True)
class LogarithmicPressure(PressureLaw):
    """U(y) = y log y + a y + b; the default b = 1 gives g(1) = 0 and P(y) = y."""

    a: float = 0.0
    b: float = 1.0
    name = "log"

    def U(self, y):
        y = np.asarray(y, dtype=float)
        return xlogy(y, y) + self.a * y + self.b

    def dU(self, y):
        return np.log(y) + 1.0 + self.a

    def d2U(self, y):
        return 1.0 / np.asarray(y, dtype=float)

    def d3U(self, y):
        return -1.0 / np.asarray(y, dtype=float) ** 2

    def dU_inverse(self, s):
        return np.exp(np.asarray(s, dtype=float) - 1.0 - self.a)

    def describe(self) -> dict:
        return {"law": self.name, "a": self.a, "b": self.b}


@dataclass(frozen=True)
class PowerPressure(PressureLaw):
    """U(y) = c y^m + a y + b with m > 1, so P(y) = c (m - 1) y^m."""

    c: float
    m: float
    a: float = 0.5
    b: float = 0.0
    name = "power"

    def __post_init__(self):
        if not self.m > 1:
            raise ConfigError(f"power law exponent must exceed 1, got {self.m}", section="model", key="m")
        if not self.c > 0:
            raise ConfigError(f"power law coefficient must be positive, got {self.c}", section="model", key="c")

    @classmethod
    def adiabatic(cls, gamma_ad: float) -> "PowerPressure":
        """Polytropic gas, P(y) = y^gamma_ad."""
        if not 1 < gamma_ad <= 3:
            raise ConfigError(f"gamma_ad must lie in (1, 3], got {gamma_ad}", section="model", key="gamma_ad")
        return cls(1.0 / (gamma_ad - 1.0), gamma_ad)

    @classmethod
    def capillary(cls, s: float) -> "PowerPressure":
        """Energy matched to the capillarity exponent s, P(y) = y^(s + 2) / 2."""
        if not -1 < s <= 1:
            raise ConfigError(f"capillarity exponent s must lie in (-1, 1], got {s}", section="model", key="s")
        m = s + 2.0
        return cls(1.0 / (2.0 * (m - 1.0)), m)

    def U(self, y):
        y = np.asarray(y, dtype=float)
        return self.c * y**self.m + self.a * y + self.b

    def dU(self, y):
        return self.c * self.m * np.asarray(y, dtype=float) ** (self.m - 1) + self.a

    def d2U(self, y):
        return self.c * self.m * (self.m - 1) * np.asarray(y, dtype=float) ** (self.m - 2)

    def d3U(self, y):
        return self.c * self.m * (self.m - 1) * (self.m - 2) * np.asarray(y, dtype=float) ** (self.m - 3)

    def dU_inverse(self, s):
        base = (np.asarray(s, dtype=float) - self.a) / (self.c * self.m)
        with np.errstate(invalid="ignore"):
            return np.where(base > 0, np.abs(base) ** (1.0 / (self.m - 1)), np.nan)

    def describe(self) -> dict:
        return {"law": self.name, "c": self.c, "m": self.m, "a": self.a, "b": self.b}


def build_pressure(law: str = "log", **params) -> PressureLaw:
    """
    Pressure law from configuration values.

    Args:
        law: "log", "adiabatic" (needs gamma_ad), "capillary" (needs s) or
            "power" (needs c, m; optional a, b).
        **params: Law parameters.

    Returns:
        A validated PressureLaw.

    Raises:
        ConfigError: On unknown laws, missing parameters or failed validation.
    """
    try:
        if law == "log":
            pressure = LogarithmicPressure(**params)
        elif law == "adiabatic":
            pressure = PowerPressure.adiabatic(params.pop("gamma_ad", 1.4), **params)
        elif law == "capillary":
            pressure = PowerPressure.capillary(params.pop("s"), **params)
        elif law == "power":
            pressure = PowerPressure(**params)
        else:
            raise ConfigError(f"unknown pressure law {law!r}", section="model", key="pressure")
    except (TypeError, KeyError) as exc:
        raise ConfigError(f"bad parameters for pressure law {law!r}: {exc}", section="model") from exc
    pressure.validate()
    return pressure
