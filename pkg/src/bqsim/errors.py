"""Exception types shared across the package."""

from __future__ import annotations

__all__ = [
    "ConfigError",
    "DegenerateModeError",
    "SymmetryError",
    "DivergenceError",
    "CflError",
    "BlowUpError",
    "QuadratureBudgetError",
]


class ConfigError(ValueError):
    """Malformed configuration; carries a field-level message."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"config field '{field}': {message}")


class DegenerateModeError(ValueError):
    """Eigenbasis requested at a wavevector with vanishing horizontal part."""


class SymmetryError(ValueError):
    """Hermitian symmetry violated beyond tolerance."""


class DivergenceError(ValueError):
    """Divergence-free precondition violated beyond tolerance."""


class CflError(RuntimeError):
    """Time step exceeds the advective CFL bound."""


class BlowUpError(RuntimeError):
    """Non-finite values or gradient blow-up during time stepping."""

    def __init__(self, message: str, time: float):
        self.time = time
        super().__init__(f"{message} (t = {time:.6g})")


class QuadratureBudgetError(RuntimeError):
    """Oscillatory quadrature would exceed the node budget."""

    def __init__(self, message: str, max_time: float):
        self.max_time = max_time
        super().__init__(message)
