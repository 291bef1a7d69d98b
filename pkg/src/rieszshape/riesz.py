"""Riesz self-interaction energy, potentials, closed forms and a Monte Carlo oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .domain import (
    DiskSystem,
    Domain,
    EllipseDomain,
    StarDomain,
    area,
    bounding_box,
    boundary_pieces,
    contains,
    diameter,
    perimeter,
)
from .errors import ParameterError, ToleranceError
from .quadrature import RuleSpec, nonlocal_from_pieces, potential_from_pieces

__all__ = [
    "QuadratureConfig",
    "EnergyBreakdown",
    "nonlocal_energy",
    "potential_at",
    "total_energy",
    "ball_energy_closed",
    "ellipse_energy_closed",
    "ball_potential_closed",
    "ball_potential_near_boundary",
    "ball_potential_constant",
    "ball_boundary_slope",
    "ball_singular_coeff",
    "mc_nonlocal_oracle",
    "disk_system_energy",
    "DiskSystemEnergy",
]


@dataclass(frozen=True)
class QuadratureConfig:
    """Resolution of the boundary quadrature.

    ``boundary_panels`` is the number of outer trapezoid nodes per closed
    curve; ``singular_split_radius`` the parameter half-width of the graded
    region around the singular point.  ``tol`` bounds the reported error
    estimate; exceeding it raises :class:`ToleranceError`.
    """

    boundary_panels: int = 256
    singular_split_radius: float = 2.0 * math.pi / 32.0
    mc_samples: int = 200_000
    mc_seed: int = 12345
    tol: float = 1e-8

    def __post_init__(self):
        if int(self.boundary_panels) != self.boundary_panels or self.boundary_panels < 64:
            raise ParameterError(f"boundary_panels must be an integer >= 64, got {self.boundary_panels!r}")
        if not (0.0 < self.singular_split_radius <= math.pi / 2):
            raise ParameterError("singular_split_radius must lie in (0, pi/2]")
        if int(self.mc_samples) != self.mc_samples or self.mc_samples < 1:
            raise ParameterError("mc_samples must be a positive integer")
        if not (self.tol > 0.0):
            raise ParameterError("tol must be positive")

    def rule_for(self, dom: Domain) -> RuleSpec:
        n = int(self.boundary_panels)
        if isinstance(dom, StarDomain):
            n = max(n, 8 * dom.n_modes)
        n += n % 2
        return RuleSpec(outer=n, split=self.singular_split_radius)


@dataclass(frozen=True)
class EnergyBreakdown:
    perimeter: float
    nonlocal_: float
    total: float
    alpha: float
    mass: float
    err_estimate: float

    def to_json(self) -> dict:
        return {
            "perimeter": self.perimeter,
            "nonlocal": self.nonlocal_,
            "total": self.total,
            "alpha": self.alpha,
            "mass": self.mass,
            "err_estimate": self.err_estimate,
        }


def _cfg(config: QuadratureConfig | None) -> QuadratureConfig:
    return QuadratureConfig() if config is None else config


def _nonlocal_with_err(dom: Domain, alpha: float, config: QuadratureConfig) -> tuple[float, float]:
    pieces = boundary_pieces(dom)
    val, err = nonlocal_from_pieces(pieces, pieces, alpha, config.rule_for(dom))
    # roundoff floor of the boundary reduction
    err = max(err, 1e-14 * abs(val))
    return val, err


def nonlocal_energy(dom: Domain, alpha: float, config: QuadratureConfig | None = None) -> float:
    """int_Omega int_Omega |x - y|^(-alpha) dx dy by boundary-integral quadrature."""
    alpha = specfun.check_alpha(alpha)
    config = _cfg(config)
    val, err = _nonlocal_with_err(dom, alpha, config)
    if err > config.tol * max(1.0, abs(val)):
        raise ToleranceError(
            f"nonlocal energy error estimate {err:.3e} exceeds tol={config.tol:g}", estimate=err, value=val
        )
    return val


def potential_at(dom: Domain, alpha: float, x, config: QuadratureConfig | None = None) -> np.ndarray:
    """v_Omega(x) = int_Omega |x - y|^(-alpha) dy at each row of ``x``."""
    alpha = specfun.check_alpha(alpha)
    config = _cfg(config)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[-1] != 2 or not np.all(np.isfinite(x)):
        raise ParameterError("evaluation points must be finite rows (x, y)")
    return potential_from_pieces(boundary_pieces(dom), alpha, x, config.rule_for(dom))


def total_energy(dom: Domain, alpha: float, config: QuadratureConfig | None = None) -> EnergyBreakdown:
    """Perimeter plus Riesz energy; ellipses and single disks use the exact formulas."""
    alpha = specfun.check_alpha(alpha)
    config = _cfg(config)
    if isinstance(dom, EllipseDomain):
        return ellipse_energy_closed(dom.R, dom.e, alpha)
    if isinstance(dom, DiskSystem) and len(dom.disks) == 1:
        return ball_energy_closed(dom.disks[0][2], alpha)
    per = perimeter(dom)
    nl, err = _nonlocal_with_err(dom, alpha, config)
    if err > config.tol * max(1.0, abs(nl)):
        raise ToleranceError(
            f"nonlocal energy error estimate {err:.3e} exceeds tol={config.tol:g}", estimate=err, value=nl
        )
    return EnergyBreakdown(per, nl, per + nl, alpha, area(dom), err)


# ----------------------------------------------------------------------------
# closed forms


def _ball_nonlocal(R: float, alpha: float) -> float:
    g = specfun.gamma
    return 2.0 * math.pi**2 * g(2.0 - alpha) * R ** (4.0 - alpha) / (g(2.0 - alpha / 2.0) * g(3.0 - alpha / 2.0))


def _positive_length(name: str, R) -> float:
    R = float(R)
    if not (math.isfinite(R) and R > 0.0):
        raise ParameterError(f"{name} must be positive and finite, got {R!r}")
    return R


def ball_energy_closed(R: float, alpha: float) -> EnergyBreakdown:
    """Exact energy of the disk of radius R."""
    alpha = specfun.check_alpha(alpha)
    R = _positive_length("radius", R)
    per = 2.0 * math.pi * R
    nl = _ball_nonlocal(R, alpha)
    return EnergyBreakdown(per, nl, per + nl, alpha, math.pi * R * R, 0.0)


def ellipse_energy_closed(R: float, e: float, alpha: float) -> EnergyBreakdown:
    """Exact energy of the ellipse of area pi R^2 and eccentricity e."""
    alpha = specfun.check_alpha(alpha)
    R = _positive_length("effective radius", R)
    e = float(e)
    if not 0.0 <= e < 1.0:
        raise ParameterError(f"eccentricity must lie in [0, 1), got {e!r}")
    if e == 0.0:
        return ball_energy_closed(R, alpha)
    g = specfun.gamma
    e2 = e * e
    w = 1.0 - e2
    per = 4.0 * R * w**-0.25 * specfun.elliptic_e(e2)
    b = 1.0 - alpha / 2.0
    brace = w * specfun.hyp2f1(0.5, b, 1.0, e2) + w ** (alpha / 2.0) * specfun.hyp2f1(0.5, b, 1.0, e2 / (e2 - 1.0))
    pref = math.pi**2 * w ** (-(alpha + 2.0) / 4.0) * g(2.0 - alpha) * R ** (4.0 - alpha)
    pref /= g(2.0 - alpha / 2.0) * g(3.0 - alpha / 2.0)
    nl = pref * brace
    return EnergyBreakdown(per, nl, per + nl, alpha, math.pi * R * R, 0.0)


def ball_potential_constant(alpha: float) -> float:
    """v_B(1) for the unit disk."""
    alpha = specfun.check_alpha(alpha)
    return math.pi * specfun.gamma(2.0 - alpha) / specfun.gamma(2.0 - alpha / 2.0) ** 2


def ball_potential_closed(r, alpha: float) -> np.ndarray:
    """Potential of the unit disk at distance r from its centre.

    The hypergeometric continuation stays accurate up to r = 1, so no
    separate expansion is used near the boundary.
    """
    alpha = specfun.check_alpha(alpha)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or not np.all(np.isfinite(r)):
        raise ParameterError("radii must be finite and non-negative")
    v1 = ball_potential_constant(alpha)
    h = specfun.hyp2f1

    def one(x: float) -> float:
        if x == 1.0:
            return v1
        if x < 1.0:
            return 2.0 * math.pi / (2.0 - alpha) * h((alpha - 2.0) / 2.0, alpha / 2.0, 1.0, x * x)
        return math.pi * x**-alpha * h(alpha / 2.0, alpha / 2.0, 2.0, 1.0 / (x * x))

    out = np.vectorize(one, otypes=[float])(r)
    return out if out.ndim else float(out)


def ball_potential_near_boundary(r, alpha: float) -> np.ndarray:
    """Leading-order expansion of the unit-disk potential in r = |x| - 1.

    alpha < 1:  v0 + s_alpha r
    alpha = 1:  v0 - r (2 ln|r|^-1 - 2 + 3 ln 4)
    alpha > 1:  v0 - C_alpha |r|^(1-alpha) r
    """
    alpha = specfun.check_alpha(alpha)
    r = np.asarray(r, dtype=float)
    v0 = ball_potential_constant(alpha)
    if alpha < 1.0:
        return v0 + ball_boundary_slope(alpha) * r
    if alpha == 1.0:
        with np.errstate(divide="ignore", invalid="ignore"):
            corr = np.where(r == 0.0, 0.0, r * (2.0 * np.log(1.0 / np.abs(r)) - 2.0 + 3.0 * math.log(4.0)))
        return v0 - corr
    return v0 - ball_singular_coeff(alpha) * np.abs(r) ** (1.0 - alpha) * r


def ball_boundary_slope(alpha: float) -> float:
    """Radial derivative of the unit-disk potential at |x| = 1 for alpha < 1."""
    if not alpha < 1.0:
        raise ParameterError("the boundary slope is finite only for alpha < 1")
    g = specfun.gamma
    return -math.pi * alpha * (2.0 - alpha) * g(1.0 - alpha) / (2.0 * g(2.0 - alpha / 2.0) ** 2)


def ball_singular_coeff(alpha: float) -> float:
    """C_alpha = sqrt(pi) Gamma((alpha-1)/2) / ((2-alpha) Gamma(alpha/2)) for alpha > 1."""
    if not alpha > 1.0:
        raise ParameterError("the singular boundary coefficient is defined for alpha > 1")
    g = specfun.gamma
    return math.sqrt(math.pi) * g((alpha - 1.0) / 2.0) / ((2.0 - alpha) * g(alpha / 2.0))


# ----------------------------------------------------------------------------
# Monte Carlo oracle


def mc_nonlocal_oracle(
    dom: Domain, alpha: float, n: int | None = None, seed: int | None = None, config: QuadratureConfig | None = None
) -> tuple[float, float]:
    """Unbiased Monte Carlo estimate of the Riesz energy and its standard error.

    X is uniform in the domain; Y = X + Z with Z drawn from the density
    proportional to |z|^(-alpha) on the disk of radius diam(Omega).  The
    weight |Omega| * C * 1_Omega(Y) is bounded, so the variance is finite for
    every alpha < 2 (plain pair sampling has infinite variance once alpha >= 1).
    """
    alpha = specfun.check_alpha(alpha)
    config = _cfg(config)
    n = config.mc_samples if n is None else int(n)
    seed = config.mc_seed if seed is None else seed
    if n < 10_000:
        raise ParameterError(f"the Monte Carlo oracle needs at least 10^4 samples, got {n}")
    rng = np.random.default_rng(seed)
    m = area(dom)
    D = diameter(dom)
    xmin, xmax, ymin, ymax = bounding_box(dom)
    box = (xmax - xmin) * (ymax - ymin)
    const = 2.0 * math.pi * D ** (2.0 - alpha) / (2.0 - alpha)

    weights = np.empty(n)
    filled = 0
    accept = max(0.05, min(1.0, m / box))
    while filled < n:
        k = int(1.2 * (n - filled) / accept) + 16
        p = np.column_stack([rng.uniform(xmin, xmax, k), rng.uniform(ymin, ymax, k)])
        p = p[contains(dom, p)][: n - filled]
        j = len(p)
        rho = D * rng.random(j) ** (1.0 / (2.0 - alpha))
        phi = 2.0 * math.pi * rng.random(j)
        y = p + np.column_stack([rho * np.cos(phi), rho * np.sin(phi)])
        weights[filled : filled + j] = contains(dom, y)
        filled += j
    est = m * const * weights
    return float(est.mean()), float(est.std(ddof=1) / math.sqrt(n))


# ----------------------------------------------------------------------------
# disk systems


@dataclass(frozen=True)
class DiskSystemEnergy:
    """Energy of a disjoint disk union with its pair terms."""

    perimeter: float
    self_energy: float
    interaction: float
    total: float
    lower_bracket: float
    upper_bracket: float
    alpha: float

    def to_json(self) -> dict:
        return {
            "perimeter": self.perimeter,
            "self_energy": self.self_energy,
            "interaction": self.interaction,
            "total": self.total,
            "lower_bracket": self.lower_bracket,
            "upper_bracket": self.upper_bracket,
            "alpha": self.alpha,
        }


def _hyp_series_vec(a: float, b: float, c: float, z: np.ndarray) -> np.ndarray:
    """Vectorized 2F1 series for 0 <= z <= zmax < 1."""
    z = np.asarray(z, dtype=float)
    total = np.ones_like(z)
    term = np.ones_like(z)
    zmax = float(z.max()) if z.size else 0.0
    for n in range(100000):
        term = term * ((a + n) * (b + n) / ((c + n) * (n + 1.0))) * z
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)) and n > 2:
            return total
        if zmax < 1e-300:
            return total
    raise ArithmeticError("vectorized hypergeometric series did not converge")


def _pair_interaction(ci, ri, cj, rj, alpha: float, n_r: int = 24, n_t: int = 64) -> float:
    """int_{B_i} int_{B_j} |x - y|^-alpha via the exterior potential of B_j integrated over B_i."""
    d = float(np.hypot(ci[0] - cj[0], ci[1] - cj[1]))
    x, w = np.polynomial.legendre.leggauss(n_r)
    rr = 0.5 * (x + 1.0) * ri
    wr = 0.5 * w * ri
    th = 2.0 * math.pi * np.arange(n_t) / n_t
    R, T = np.meshgrid(rr, th, indexing="ij")
    dist = np.sqrt(d * d + R * R + 2.0 * d * R * np.cos(T)) / rj
    z = 1.0 / dist**2
    v = math.pi * rj ** (2.0 - alpha) * dist**-alpha * _hyp_series_vec(alpha / 2.0, alpha / 2.0, 2.0, z)
    return float(np.sum(v * R * wr[:, None]) * (2.0 * math.pi / n_t))


def disk_system_energy(ds: DiskSystem, alpha: float) -> DiskSystemEnergy:
    """Energy of a disjoint union of disks using closed-form self terms.

    Pair terms integrate the closed-form exterior potential of one disk over the
    other.  The brackets replace every pair distance by d_ij + r_i + r_j
    (lower) or by the gap d_ij - r_i - r_j (upper).
    """
    alpha = specfun.check_alpha(alpha)
    arr = ds.array
    per = float(2.0 * math.pi * arr[:, 2].sum())
    selfe = float(sum(_ball_nonlocal(r, alpha) for r in arr[:, 2]))
    inter = 0.0
    lower = 0.0
    upper = 0.0
    m = math.pi * arr[:, 2] ** 2
    nd = len(arr)
    for i in range(nd):
        for j in range(i + 1, nd):
            ci, cj = arr[i, :2], arr[j, :2]
            ri, rj = arr[i, 2], arr[j, 2]
            # the quadrature resolves the smaller disk against the larger one's potential
            if ri > rj:
                ci, cj, ri, rj = cj, ci, rj, ri
            inter += 2.0 * _pair_interaction(ci, ri, cj, rj, alpha)
            d = float(np.hypot(*(arr[i, :2] - arr[j, :2])))
            lower += 2.0 * m[i] * m[j] * (d + arr[i, 2] + arr[j, 2]) ** -alpha
            upper += 2.0 * m[i] * m[j] * (d - arr[i, 2] - arr[j, 2]) ** -alpha
    base = per + selfe
    return DiskSystemEnergy(per, selfe, inter, base + inter, base + lower, base + upper, alpha)
