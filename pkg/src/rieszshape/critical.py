"""Critical masses for global and local minimality of the disk, and the two-disk comparison."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import specfun
from .errors import ParameterError

__all__ = [
    "ThresholdSet",
    "SplitComparison",
    "mass_c1",
    "mass_c2",
    "thresholds",
    "two_disk_excess",
    "two_disk_excess_grid",
    "split_coupling",
    "F1",
    "F2",
    "quartic_coeff",
    "eps_of_mass",
    "mass_of_eps",
    "ball_coeff",
    "ball_total_energy",
    "two_disk_split_energy",
    "mass_c1_by_root",
    "mass_c2_by_root",
    "critical_table",
]

_SQRT2M1 = math.sqrt(2.0) - 1.0


@dataclass(frozen=True)
class ThresholdSet:
    alpha: float
    m_c1: float
    m_c2: float

    @property
    def eps_c1(self) -> float:
        return eps_of_mass(self.m_c1, self.alpha)

    @property
    def eps_c2(self) -> float:
        return eps_of_mass(self.m_c2, self.alpha)


@dataclass(frozen=True)
class SplitComparison:
    """F_tilde(t, mu) and F(t, mu) = F_tilde(t, mu) - F_tilde(0, mu)."""

    t: float
    mu: float
    alpha: float
    F_tilde: float
    F: float


def _positive(name: str, x) -> float:
    x = float(x)
    if not (math.isfinite(x) and x > 0.0):
        raise ParameterError(f"{name} must be positive and finite, got {x!r}")
    return x


def _log_gamma_ratio(alpha: float) -> float:
    # log[Gamma(2 - a/2) Gamma(3 - a/2)]
    lg = specfun.loggamma
    return lg(2.0 - alpha / 2.0) + lg(3.0 - alpha / 2.0)


def mass_c1(alpha: float) -> float:
    """Mass above which two far-apart disks of half the mass beat one disk."""
    alpha = specfun.check_alpha(alpha)
    # 1 - 2^((a-2)/2) via expm1 keeps accuracy as a -> 2
    denom = -math.expm1((alpha - 2.0) / 2.0 * math.log(2.0))
    log_inner = (
        math.log(_SQRT2M1) + _log_gamma_ratio(alpha) - math.log(math.pi) - math.log(denom)
        - specfun.loggamma(2.0 - alpha)
    )
    return math.pi * math.exp(2.0 / (3.0 - alpha) * log_inner)


def mass_c2(alpha: float) -> float:
    """Mass above which the disk is unstable to elliptical deformations."""
    alpha = specfun.check_alpha(alpha)
    log_inner = (
        math.log(3.0) + _log_gamma_ratio(alpha) - math.log(math.pi * alpha) - specfun.loggamma(3.0 - alpha)
    )
    return math.pi * math.exp(2.0 / (3.0 - alpha) * log_inner)


def thresholds(alpha: float) -> ThresholdSet:
    return ThresholdSet(specfun.check_alpha(alpha), mass_c1(alpha), mass_c2(alpha))


def split_coupling(alpha: float) -> float:
    """2 (sqrt 2 - 1) / (2 - 2^(alpha/2))."""
    alpha = specfun.check_alpha(alpha)
    # 2 - 2^(a/2) = 2 (1 - 2^(a/2 - 1))
    return _SQRT2M1 / -math.expm1(math.log(2.0) * (alpha / 2.0 - 1.0))


def F1(t, alpha: float):
    """t^((4-a)/2) + (1-t)^((4-a)/2) - 1."""
    t = np.asarray(t, dtype=float)
    p = (4.0 - alpha) / 2.0
    return t**p + (1.0 - t) ** p - 1.0


def F2(t):
    """t^(1/2) + (1-t)^(1/2) - 1."""
    t = np.asarray(t, dtype=float)
    return np.sqrt(t) + np.sqrt(1.0 - t) - 1.0


def _check_t(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t < 0.0) or np.any(t > 0.5):
        raise ParameterError("mass fraction t must lie in [0, 1/2]")
    return t


def two_disk_excess(t: float, mu: float, alpha: float) -> SplitComparison:
    """Two-disk energy comparison at infinite separation, in units of 2 sqrt(pi m).

    ``t`` and ``1 - t`` are the mass fractions and ``mu = m / m_c1``.
    """
    alpha = specfun.check_alpha(alpha)
    t = float(_check_t(t))
    mu = _positive("mu", mu)
    ft, f = two_disk_excess_grid(np.array([t]), mu, alpha)
    return SplitComparison(t, mu, alpha, float(ft[0]), float(f[0]))


def two_disk_excess_grid(t: np.ndarray, mu: float, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (F_tilde, F) over an array of mass fractions."""
    t = _check_t(t)
    k = split_coupling(alpha) * mu ** ((3.0 - alpha) / 2.0)
    p = (4.0 - alpha) / 2.0
    ft = np.sqrt(t) + np.sqrt(1.0 - t) + k * (t**p + (1.0 - t) ** p)
    # F = F2 + k F1 avoids the cancellation in F_tilde(t) - F_tilde(0)
    f = F2(t) + k * F1(t, alpha)
    return ft, f


def ball_coeff(alpha: float) -> float:
    """Nonlocal energy of the disk of radius R is ball_coeff * R^(4 - alpha)."""
    alpha = specfun.check_alpha(alpha)
    lg = specfun.loggamma
    return 2.0 * math.pi**2 * math.exp(lg(2.0 - alpha) - _log_gamma_ratio(alpha))


def ball_total_energy(m: float, alpha: float) -> float:
    """Perimeter plus Riesz energy of the disk of area m."""
    m = _positive("m", m)
    R = math.sqrt(m / math.pi)
    return 2.0 * math.pi * R + ball_coeff(alpha) * R ** (4.0 - alpha)


def two_disk_split_energy(m: float, t: float, alpha: float) -> float:
    """Energy of disks of masses t m and (1 - t) m at infinite separation."""
    m = _positive("m", m)
    if not 0.0 <= t <= 1.0:
        raise ParameterError("t must lie in [0, 1]")
    return sum(ball_total_energy(f * m, alpha) for f in (t, 1.0 - t) if f * m > 0.0)


def quartic_coeff(m: float, alpha: float) -> float:
    """Coefficient of e^4 in E(ellipse of eccentricity e) - E(disk), both of area m."""
    alpha = specfun.check_alpha(alpha)
    m = _positive("m", m)
    R = math.sqrt(m / math.pi)
    lg = specfun.loggamma
    nl = math.pi**2 * alpha * math.exp(lg(3.0 - alpha) - _log_gamma_ratio(alpha)) * R ** (4.0 - alpha) / 32.0
    return 3.0 * math.pi * R / 32.0 - nl


def eps_of_mass(m: float, alpha: float) -> float:
    """Coupling (m / pi)^((3 - alpha)/2) of the area-pi rescaled problem."""
    alpha = specfun.check_alpha(alpha)
    m = _positive("m", m)
    return (m / math.pi) ** ((3.0 - alpha) / 2.0)


def mass_of_eps(eps: float, alpha: float) -> float:
    alpha = specfun.check_alpha(alpha)
    eps = _positive("eps", eps)
    return math.pi * eps ** (2.0 / (3.0 - alpha))


def _bracket_root(f, guess: float) -> float:
    lo, hi = guess / 2.0, guess * 2.0
    while f(lo) * f(hi) > 0.0:
        lo, hi = lo / 2.0, hi * 2.0
        if hi > 1e12:
            raise ArithmeticError("could not bracket the threshold")
    return brentq(f, lo, hi, xtol=1e-15, rtol=4.0 * np.finfo(float).eps, maxiter=500)


def mass_c1_by_root(alpha: float) -> float:
    """Solve E(disk of mass m) = 2 E(disk of mass m/2) directly, as an independent check."""
    alpha = specfun.check_alpha(alpha)

    def f(m: float) -> float:
        # divide by sqrt(m) so the perimeter parts are O(1)
        return (two_disk_split_energy(m, 0.5, alpha) - ball_total_energy(m, alpha)) / math.sqrt(m)

    return _bracket_root(f, math.pi)


def mass_c2_by_root(alpha: float) -> float:
    """Zero of quartic_coeff in m."""
    alpha = specfun.check_alpha(alpha)
    return _bracket_root(lambda m: quartic_coeff(m, alpha) / math.sqrt(m), math.pi)


def critical_table(alphas) -> list[ThresholdSet]:
    return [thresholds(a) for a in alphas]
