"""Planar isoperimetric problem with Riesz repulsion.

E(Omega) = |dOmega| + int_Omega int_Omega |x - y|^(-alpha) dx dy, 0 < alpha < 2.
"""

from . import critical, domain, minimize, riesz, specfun
from .critical import mass_c1, mass_c2, quartic_coeff, thresholds
from .domain import DiskSystem, EllipseDomain, StarDomain, area, perimeter
from .errors import (
    ConvergenceError,
    InvalidDomainError,
    OverlapError,
    ParameterError,
    PoleError,
    RieszShapeError,
    StepCollapseError,
    ToleranceError,
)
from .minimize import FlowConfig, gradient_flow, phase_scan
from .riesz import QuadratureConfig, nonlocal_energy, potential_at, total_energy

__version__ = "0.1.0"

__all__ = [
    "critical",
    "domain",
    "minimize",
    "riesz",
    "specfun",
    "mass_c1",
    "mass_c2",
    "quartic_coeff",
    "thresholds",
    "DiskSystem",
    "EllipseDomain",
    "StarDomain",
    "area",
    "perimeter",
    "FlowConfig",
    "gradient_flow",
    "phase_scan",
    "QuadratureConfig",
    "nonlocal_energy",
    "potential_at",
    "total_energy",
    "ConvergenceError",
    "InvalidDomainError",
    "OverlapError",
    "ParameterError",
    "PoleError",
    "RieszShapeError",
    "StepCollapseError",
    "ToleranceError",
]
