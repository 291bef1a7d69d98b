"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class RieszShapeError(Exception):
    """Base class for all package errors."""


class ParameterError(RieszShapeError, ValueError):
    """An argument lies outside the supported range (alpha window, special-function domain)."""


class PoleError(ParameterError):
    """Evaluation requested at a pole (e.g. Gamma at a non-positive integer)."""


class InvalidDomainError(RieszShapeError, ValueError):
    """Geometric data violates a domain invariant."""


class OverlapError(InvalidDomainError):
    """Disks of a DiskSystem intersect or touch."""


class ConvergenceError(RieszShapeError, ArithmeticError):
    def __init__(self, message: str, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class ToleranceError(RieszShapeError, ArithmeticError):
    def __init__(self, message: str, estimate: float, value: float | None = None):
        super().__init__(f"{message} (estimated error {estimate:.3e})")
        self.estimate = estimate
        self.value = value


class StepCollapseError(RieszShapeError, RuntimeError):
    """Backtracking line search exhausted its retries."""
