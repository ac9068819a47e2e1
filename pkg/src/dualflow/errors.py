"""Exception hierarchy; each error maps to a CLI exit code."""


class DualflowError(Exception):
    """Base class for all dualflow errors."""

    exit_code = 1

    def payload(self) -> dict:
        """Serializable description of the error for run reports."""
        return {"error": type(self).__name__, "message": str(self)}


class ConfigError(DualflowError):
    """Invalid or unknown configuration entry."""

    exit_code = 2

    def __init__(self, message: str, section: str = None, key: str = None):
        super().__init__(message)
        self.section = section
        self.key = key

    def payload(self) -> dict:
        data = super().payload()
        data["section"] = self.section
        data["key"] = self.key
        return data


class PreconditionError(DualflowError):
    """Input violates the precondition of an operation."""

    exit_code = 3


class DomainError(PreconditionError):
    """A state lies outside dom F."""

    def __init__(self, message: str, cell: tuple = None):
        super().__init__(message)
        self.cell = cell

    def payload(self) -> dict:
        data = super().payload()
        data["cell"] = None if self.cell is None else [int(i) for i in self.cell]
        return data


class HorizonError(PreconditionError):
    """Requested horizon exceeds the smoothness horizon of a scenario."""

    def __init__(self, message: str, max_horizon: float):
        super().__init__(message)
        self.max_horizon = max_horizon

    def payload(self) -> dict:
        data = super().payload()
        data["max_horizon"] = float(self.max_horizon)
        return data


class WeightError(PreconditionError):
    """The weight does not make h I + 2 H L*(v#) positive semidefinite."""

    def __init__(self, message: str, min_eigenvalue: float, suggested_gamma: float):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue
        self.suggested_gamma = suggested_gamma

    def payload(self) -> dict:
        data = super().payload()
        data["min_eigenvalue"] = float(self.min_eigenvalue)
        data["suggested_gamma"] = float(self.suggested_gamma)
        return data


class ConvergenceError(DualflowError):
    """An iterative method did not reach its tolerance."""

    exit_code = 4


class ConsistencyError(DualflowError):
    """An internal consistency check failed."""

    exit_code = 5


class StructuralError(DualflowError, ValueError):
    """Array shapes do not match the grid or the model."""

    exit_code = 5
