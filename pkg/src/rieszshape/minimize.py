"""Shape gradient flow for the renormalized energy, splitting mechanisms and the (alpha, m) phase scan."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import critical, specfun
from .boundary import TWO_PI
from .domain import (
    DiskSystem,
    Domain,
    StarDomain,
    area,
    boundary_pieces,
    chords,
    curvature_at,
    diameter,
    perimeter,
    star_cut_pieces,
)
from .errors import InvalidDomainError, ParameterError, RieszShapeError, StepCollapseError
from .quadrature import nonlocal_from_pieces, potential_from_pieces
from .riesz import (
    EnergyBreakdown,
    QuadratureConfig,
    ball_energy_closed,
    disk_system_energy,
    nonlocal_energy,
)

__all__ = [
    "FlowConfig",
    "FlowResult",
    "ShapeGradient",
    "PhaseVerdict",
    "CutTestResult",
    "DiameterCheck",
    "renormalized_energy",
    "shape_gradient",
    "el_residual",
    "gradient_flow",
    "line_cut_test",
    "cut_delta",
    "cut_part_energy",
    "diameter_direction",
    "best_split",
    "erase_dilate_gain",
    "interpolation_ratio",
    "chain_ansatz_energy",
    "chain_energy_bound",
    "diameter_bounds_check",
    "phase_scan",
    "phase_scan_csv",
    "VERDICTS",
]

VERDICTS = ("disk-global-candidate", "disk-not-global", "disk-locally-unstable")

_LINE_SEARCH_SLACK = 1e-12
_MAX_FAILURES = 40


def _quad(cfg: QuadratureConfig | None) -> QuadratureConfig:
    return QuadratureConfig() if cfg is None else cfg


def _check_eps(eps: float) -> float:
    eps = float(eps)
    if not (math.isfinite(eps) and eps >= 0.0):
        raise ParameterError(f"eps must be finite and non-negative, got {eps!r}")
    return eps


def renormalized_energy(dom: Domain, alpha: float, eps: float, cfg: QuadratureConfig | None = None) -> EnergyBreakdown:
    """E_eps = perimeter + eps * nonlocal; ``nonlocal_`` holds the unweighted double integral."""
    alpha = specfun.check_alpha(alpha)
    eps = _check_eps(eps)
    per = perimeter(dom)
    nl = nonlocal_energy(dom, alpha, _quad(cfg)) if eps > 0.0 else 0.0
    return EnergyBreakdown(per, nl, per + eps * nl, alpha, area(dom), 0.0)


# ----------------------------------------------------------------------------
# shape gradient


@dataclass(frozen=True, eq=False)
class ShapeGradient:
    """Boundary data of the Euler-Lagrange operator on a uniform angle grid."""

    theta: np.ndarray
    kappa: np.ndarray
    v: np.ndarray
    mu: float
    g: np.ndarray
    speed: np.ndarray
    radius: np.ndarray

    def boundary_mean(self, f: np.ndarray) -> float:
        return float(np.sum(f * self.speed) / np.sum(self.speed))


def _boundary_potential(dom: StarDomain, alpha: float, theta: np.ndarray, cfg: QuadratureConfig) -> np.ndarray:
    (piece,) = boundary_pieces(dom)
    pts = dom.boundary_points(theta)
    # the polar curve is parametrized by the polar angle itself
    return potential_from_pieces([piece], alpha, pts, cfg.rule_for(dom), on_piece=piece, on_param=theta)


def shape_gradient(
    dom: StarDomain, alpha: float, eps: float, cfg: QuadratureConfig | None = None, n_theta: int | None = None
) -> ShapeGradient:
    """g = kappa + 2 eps v - mu with mu the arclength average of kappa + 2 eps v."""
    if not isinstance(dom, StarDomain):
        raise InvalidDomainError("shape_gradient needs a StarDomain")
    alpha = specfun.check_alpha(alpha)
    eps = _check_eps(eps)
    cfg = _quad(cfg)
    theta = dom.theta_grid(n_theta)
    r, r1, _ = dom.radius_derivs(theta)
    speed = np.hypot(r, r1)
    kappa = curvature_at(dom, theta)
    v = _boundary_potential(dom, alpha, theta, cfg) if eps > 0.0 else np.zeros_like(theta)
    f = kappa + 2.0 * eps * v
    mu = float(np.sum(f * speed) / np.sum(speed))
    return ShapeGradient(theta, kappa, v, mu, f - mu, speed, r)


def el_residual(dom: StarDomain, alpha: float, eps: float, cfg: QuadratureConfig | None = None) -> float:
    """sup |kappa + 2 eps v - mu| / (1 + |mu|) over the boundary grid."""
    sg = shape_gradient(dom, alpha, eps, cfg)
    return float(np.max(np.abs(sg.g)) / (1.0 + abs(sg.mu)))


# ----------------------------------------------------------------------------
# gradient flow


@dataclass(frozen=True)
class FlowConfig:
    """Knobs of the descent.

    ``step`` is the initial pseudo-time step, ``mode_cap`` the number of
    Fourier modes carried by the iterate, ``area_target`` the enforced area.
    """

    step: float = 1.0
    max_steps: int = 500
    el_tol: float = 1e-6
    mode_cap: int = 64
    area_target: float = math.pi
    damping: float = 0.5
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)

    def __post_init__(self):
        if not (math.isfinite(self.step) and self.step > 0.0):
            raise ParameterError("step must be positive")
        if not (self.el_tol > 0.0):
            raise ParameterError("el_tol must be positive")
        if int(self.max_steps) != self.max_steps or self.max_steps < 0:
            raise ParameterError("max_steps must be a non-negative integer")
        if int(self.mode_cap) != self.mode_cap or self.mode_cap < 2:
            raise ParameterError("mode_cap must be an integer >= 2")
        if not (math.isfinite(self.area_target) and self.area_target > 0.0):
            raise ParameterError("area_target must be positive")
        if not 0.0 <= self.damping < 1.0:
            raise ParameterError("damping must lie in [0, 1)")


@dataclass(frozen=True, eq=False)
class FlowResult:
    final: StarDomain
    energy_history: list
    el_residual_history: list
    converged: bool
    split_suspected: bool
    steps: int
    alpha: float
    eps: float

    @property
    def energy(self) -> float:
        return self.energy_history[-1].total

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "eps": self.eps,
            "steps": self.steps,
            "converged": self.converged,
            "split_suspected": self.split_suspected,
            "energy": [e.total for e in self.energy_history],
            "perimeter": [e.perimeter for e in self.energy_history],
            "nonlocal": [e.nonlocal_ for e in self.energy_history],
            "el_residual": list(self.el_residual_history),
            "final": self.final.to_json(),
        }


def _resize(dom: StarDomain, n: int) -> StarDomain:
    a = np.zeros(n + 1)
    b = np.zeros(n)
    k = min(n, dom.n_modes)
    a[: k + 1] = dom.a[: k + 1]
    b[:k] = dom.b[:k]
    return StarDomain(dom.center, dom.r0, a, b)


def _normalize(dom: StarDomain, target: float) -> StarDomain:
    """Fold a_0 into r0 and rescale about the centre to the target area."""
    r0 = dom.r0 * (1.0 + dom.a[0])
    scale = 1.0 / (1.0 + dom.a[0])
    a = dom.a * scale
    a[0] = 0.0
    b = dom.b * scale
    base = StarDomain(dom.center, r0, a, b)
    lam = math.sqrt(target / area(base))
    return StarDomain(dom.center, lam * r0, a, b)


def _flow_direction(dom: StarDomain, alpha: float, eps: float, nl: float, cfg: FlowConfig):
    """Preconditioned descent direction in rho coefficients, and the EL data for the residual.

    The energy composed with area renormalization has dtheta-gradient
    (kappa + 2 eps v - mu*) r with mu* = (P + (4 - alpha) eps N) / (2 |Omega|);
    the direction applies max(k^2 - 1, 2)^-1 per mode and tapers the top octave.
    """
    n = dom.n_modes
    n_theta = max(128, 4 * n)
    sg = shape_gradient(dom, alpha, eps, cfg.quadrature, n_theta)
    per = float(np.mean(sg.speed) * TWO_PI)
    mass = float(0.5 * np.mean(sg.radius**2) * TWO_PI)
    mu_star = (per + (4.0 - alpha) * eps * nl) / (2.0 * mass)
    grad = (sg.kappa + 2.0 * eps * sg.v - mu_star) * sg.radius
    gh = np.fft.rfft(grad) / n_theta
    k = np.arange(n + 1)
    # inverse of the perimeter's second variation about the disk, (k^2 - 1)
    pre = 1.0 / np.maximum(k**2 - 1.0, 2.0)
    top = k > n // 2
    pre[top] *= 1.0 - cfg.damping * (k[top] - n // 2) / max(1, n - n // 2)
    d = -gh[: n + 1] * pre / dom.r0
    da = 2.0 * d.real
    da[0] = d[0].real
    db = -2.0 * d.imag[1:]
    resid = float(np.max(np.abs(sg.g)) / (1.0 + abs(sg.mu)))
    return da, db, resid


def gradient_flow(
    dom: StarDomain, alpha: float, eps: float, cfg: FlowConfig | None = None
) -> FlowResult:
    """Descent on E_eps over star domains of fixed area with backtracking line search."""
    if not isinstance(dom, StarDomain):
        raise InvalidDomainError("gradient_flow needs a StarDomain")
    alpha = specfun.check_alpha(alpha)
    eps = _check_eps(eps)
    cfg = FlowConfig() if cfg is None else cfg
    quad = cfg.quadrature

    cur = _normalize(_resize(dom, int(cfg.mode_cap)), cfg.area_target)
    e_cur = renormalized_energy(cur, alpha, eps, quad)
    energies = [e_cur]
    residuals = []
    tau = cfg.step
    failures = 0
    converged = False
    steps = 0
    while True:
        da, db, resid = _flow_direction(cur, alpha, eps, e_cur.nonlocal_, cfg)
        residuals.append(resid)
        if resid <= cfg.el_tol:
            converged = True
            break
        if steps >= cfg.max_steps:
            break
        while True:
            try:
                trial = _normalize(cur.with_coefficients(a=cur.a + tau * da, b=cur.b + tau * db), cfg.area_target)
                e_trial = renormalized_energy(trial, alpha, eps, quad)
                ok = e_trial.total <= e_cur.total + _LINE_SEARCH_SLACK * max(1.0, abs(e_cur.total))
            except InvalidDomainError:
                ok = False
            if ok:
                break
            failures += 1
            if failures >= _MAX_FAILURES:
                raise StepCollapseError(
                    f"line search failed {failures} times in a row at step {steps} (tau={tau:.3e}, residual={resid:.3e})"
                )
            tau *= 0.5
        failures = 0
        cur, e_cur = trial, e_trial
        energies.append(e_cur)
        steps += 1
        tau = min(1.5 * tau, cfg.step)
    split = bool(np.min(1.0 + cur.rho(cur.theta_grid())) < 0.1)
    return FlowResult(cur, energies, residuals, converged, split, steps, alpha, eps)


# ----------------------------------------------------------------------------
# splitting mechanisms


@dataclass(frozen=True, eq=False)
class CutTestResult:
    """Delta(s) = 2 A(s) - 2 C(s): energy change of cutting at offset s and separating the parts."""

    s_star: float
    gain: float
    direction: np.ndarray
    s: np.ndarray
    delta: np.ndarray


def diameter_direction(dom: StarDomain) -> np.ndarray:
    p = dom.boundary_points(dom.theta_grid())
    best = (-1.0, 0, 0)
    for i in range(0, len(p), 512):
        d = np.linalg.norm(p[i : i + 512, None, :] - p[None, :, :], axis=-1)
        j = np.unravel_index(np.argmax(d), d.shape)
        if d[j] > best[0]:
            best = (float(d[j]), i + j[0], j[1])
    u = p[best[2]] - p[best[1]]
    u = u / np.linalg.norm(u)
    # fix the sign so results do not depend on grid order
    if u[0] < 0 or (u[0] == 0 and u[1] < 0):
        u = -u
    return u


def _support_range(dom: StarDomain, u: np.ndarray) -> tuple[float, float]:
    proj = dom.boundary_points(dom.theta_grid(4 * dom.grid_size)) @ u

    def refine(sign):
        j = int(np.argmax(sign * proj))
        h = TWO_PI / len(proj)
        t0 = TWO_PI * j / len(proj)
        res = minimize_scalar(
            lambda t: -sign * float(dom.boundary_points(t) @ u), bounds=(t0 - h, t0 + h), method="bounded",
            options={"xatol": 1e-13},
        )
        return -sign * res.fun

    return refine(-1.0), refine(1.0)


def cut_delta(dom: StarDomain, alpha: float, u, level: float, cfg: QuadratureConfig | None = None) -> tuple[float, float, float]:
    """(Delta, 2A, 2C) for the cut {x . u = level}."""
    cfg = _quad(cfg)
    u = np.asarray(u, dtype=float)
    low, high = star_cut_pieces(dom, u, level)
    a_len = sum(float(np.linalg.norm(q - p)) for p, q in chords(dom, u, level))
    cross, _ = nonlocal_from_pieces(low, high, alpha, cfg.rule_for(dom))
    return 2.0 * a_len - 2.0 * cross, 2.0 * a_len, 2.0 * cross


def cut_part_energy(dom: StarDomain, alpha: float, u, level: float, side: str, cfg: QuadratureConfig | None = None) -> float:
    """Riesz self-energy of one part of the cut domain."""
    cfg = _quad(cfg)
    low, high = star_cut_pieces(dom, np.asarray(u, dtype=float), level)
    pieces = low if side == "low" else high
    val, _ = nonlocal_from_pieces(pieces, pieces, alpha, cfg.rule_for(dom))
    return val


def line_cut_test(
    dom: StarDomain, alpha: float, cfg: QuadratureConfig | None = None, direction=None, n_s: int = 17
) -> CutTestResult:
    """Best straight cut perpendicular to ``direction`` (default: the diameter).

    gain = -min_s Delta(s); a positive gain means separating the two parts
    to infinity lowers the energy.
    """
    if not isinstance(dom, StarDomain):
        raise InvalidDomainError("line_cut_test needs a StarDomain")
    alpha = specfun.check_alpha(alpha)
    u = diameter_direction(dom) if direction is None else np.asarray(direction, dtype=float)
    u = u / np.linalg.norm(u)
    lo, hi = _support_range(dom, u)
    width = hi - lo
    # stay away from the tangent lines where the parts degenerate
    s = width * (0.5 - 0.5 * np.cos(np.linspace(0.0, math.pi, n_s + 2)[1:-1]))
    delta = np.array([cut_delta(dom, alpha, u, lo + si, cfg)[0] for si in s])
    j = int(np.argmin(delta))
    a = s[max(j - 1, 0)]
    b = s[min(j + 1, len(s) - 1)]
    s_star, d_star = s[j], delta[j]
    if b > a:
        res = minimize_scalar(
            lambda x: cut_delta(dom, alpha, u, lo + x, cfg)[0], bounds=(a, b), method="bounded",
            options={"xatol": 1e-6 * width},
        )
        if res.fun < d_star:
            s_star, d_star = float(res.x), float(res.fun)
    return CutTestResult(float(s_star), float(-d_star), u, s, delta)


def erase_dilate_gain(ds: DiskSystem, i: int, alpha: float) -> float:
    """E(ds) - E(ds without disk i, dilated back to the same total area)."""
    if len(ds.disks) < 2:
        raise ParameterError("erase-and-dilate needs at least two disks")
    alpha = specfun.check_alpha(alpha)
    rest = ds.without(i)
    m = float(np.sum(ds.masses))
    lam = math.sqrt(m / float(np.sum(rest.masses)))
    rest = DiskSystem(tuple((lam * x, lam * y, lam * r) for x, y, r in rest.disks))
    return disk_system_energy(ds, alpha).total - disk_system_energy(rest, alpha).total


def interpolation_ratio(dom: Domain, alpha: float, cfg: QuadratureConfig | None = None) -> float:
    """m / (P^((2-alpha)/(3-alpha)) N^(1/(3-alpha))); scale invariant."""
    alpha = specfun.check_alpha(alpha)
    m = area(dom)
    per = perimeter(dom)
    if isinstance(dom, DiskSystem):
        nl = disk_system_energy(dom, alpha)
        nl = nl.self_energy + nl.interaction
    else:
        nl = nonlocal_energy(dom, alpha, _quad(cfg))
    return m / (per ** ((2.0 - alpha) / (3.0 - alpha)) * nl ** (1.0 / (3.0 - alpha)))


def _chain(m: float, alpha: float) -> tuple[np.ndarray, np.ndarray, float]:
    n = int(math.floor(m / math.pi))
    r = math.sqrt(max(m - math.pi * n, 0.0) / math.pi)
    R = m ** (1.0 / alpha) + 2.0
    radii = [1.0] * n
    if r > 0.0:
        radii.append(r)
    radii = np.array(radii)
    return radii, R * np.arange(len(radii)), R


def chain_ansatz_energy(m: float, alpha: float) -> EnergyBreakdown:
    """Linear chain of unit disks plus one remainder disk at spacing m^(1/alpha) + 2.

    Pair interactions use the upper bracket m_i m_j / (d_ij - r_i - r_j)^alpha.
    """
    alpha = specfun.check_alpha(alpha)
    m = float(m)
    if not (math.isfinite(m) and m >= 1.0):
        raise ParameterError("the chain construction needs m >= 1")
    radii, x, _ = _chain(m, alpha)
    if len(radii) == 0:
        # m < pi: a single disk of mass m
        radii, x = np.array([math.sqrt(m / math.pi)]), np.zeros(1)
    per = float(TWO_PI * radii.sum())
    self_e = float(sum(ball_energy_closed(r, alpha).nonlocal_ for r in radii))
    masses = math.pi * radii**2
    gap = np.abs(x[:, None] - x[None, :]) - radii[:, None] - radii[None, :]
    off = ~np.eye(len(radii), dtype=bool)
    inter = float(np.sum((masses[:, None] * masses[None, :])[off] * gap[off] ** -alpha))
    nl = self_e + inter
    return EnergyBreakdown(per, nl, per + nl, alpha, float(masses.sum()), 0.0)


def chain_energy_bound(m: float, alpha: float) -> float:
    """(N+1) E(B_1) + 4 m^2 / (R-2)^alpha for the chain spacing R."""
    n = int(math.floor(m / math.pi))
    R = m ** (1.0 / alpha) + 2.0
    return (n + 1) * ball_energy_closed(1.0, alpha).total + 4.0 * m * m / (R - 2.0) ** alpha


@dataclass(frozen=True)
class DiameterCheck:
    diameter: float
    energy: float
    mass: float
    lower_ok: bool
    upper_ok: bool


def diameter_bounds_check(dom: Domain, alpha: float, cfg: QuadratureConfig | None = None) -> DiameterCheck:
    """Check 2 d <= E and m^2 / d^alpha <= E for the domain itself."""
    alpha = specfun.check_alpha(alpha)
    d = diameter(dom)
    m = area(dom)
    if isinstance(dom, DiskSystem):
        e = disk_system_energy(dom, alpha).total
    else:
        e = perimeter(dom) + nonlocal_energy(dom, alpha, _quad(cfg))
    return DiameterCheck(d, e, m, m * m / d**alpha <= e, 2.0 * d <= e)


# ----------------------------------------------------------------------------
# phase scan


@dataclass(frozen=True)
class PhaseVerdict:
    alpha: float
    m: float
    disk_energy: float
    best_two_disk_energy: float
    t_star: float
    quartic: float
    quartic_sign: int
    flow_energy: float
    verdict: str
    error: str | None = None


_T_GRID = np.arange(1, 2049) / 4096.0


def best_split(m: float, alpha: float) -> tuple[float, float]:
    """(t*, energy) of the cheapest two-disk split at infinite separation, t in (0, 1/2]."""
    mu = m / critical.mass_c1(alpha)
    _, f = critical.two_disk_excess_grid(_T_GRID, mu, alpha)
    j = int(np.argmin(f))
    t_star, f_star = float(_T_GRID[j]), float(f[j])
    lo, hi = _T_GRID[max(j - 1, 0)], _T_GRID[min(j + 1, len(_T_GRID) - 1)]
    res = minimize_scalar(
        lambda t: float(critical.two_disk_excess_grid(np.array([t]), mu, alpha)[1][0]),
        bounds=(lo, hi), method="bounded", options={"xatol": 1e-12},
    )
    if res.fun < f_star:
        t_star = float(res.x)
    return t_star, critical.two_disk_split_energy(m, t_star, alpha)


def _classify(alpha: float, m: float, disk_e: float, split_e: float, quartic: float) -> str:
    th = critical.thresholds(alpha)
    if abs(m - th.m_c2) < 1e-9:
        unstable = m > th.m_c2
    else:
        unstable = quartic < 0.0
    if unstable:
        return VERDICTS[2]
    if abs(m - th.m_c1) < 1e-9:
        not_global = m > th.m_c1
    else:
        not_global = split_e < disk_e
    return VERDICTS[1] if not_global else VERDICTS[0]


def phase_scan(alpha_grid, m_grid, cfg: QuadratureConfig | None = None, flow: FlowConfig | None = None) -> list[PhaseVerdict]:
    """Classify the disk at every (alpha, m) from closed forms, optionally refining by a flow.

    When ``flow`` is given the flow starts from an ellipse of eccentricity
    0.05 and its energy (in original units) is recorded as a witness.
    Cells that fail record the error and the scan continues.
    """
    out = []
    for a in alpha_grid:
        for m in m_grid:
            a, m = float(a), float(m)
            try:
                specfun.check_alpha(a)
                if not (math.isfinite(m) and m > 0):
                    raise ParameterError(f"mass must be positive, got {m!r}")
                disk_e = critical.ball_total_energy(m, a)
                t_star, split_e = best_split(m, a)
                q = critical.quartic_coeff(m, a)
                flow_e = float("nan")
                if flow is not None:
                    eps = critical.eps_of_mass(m, a)
                    start = StarDomain.from_ellipse(1.0, 0.05, flow.mode_cap)
                    res = gradient_flow(start, a, eps, flow)
                    flow_e = math.sqrt(m / math.pi) * res.energy
                verdict = _classify(a, m, disk_e, split_e, q)
                out.append(PhaseVerdict(a, m, disk_e, split_e, t_star, q, int(np.sign(q)), flow_e, verdict))
            except (RieszShapeError, ValueError, ArithmeticError) as exc:
                nan = float("nan")
                out.append(PhaseVerdict(a, m, nan, nan, nan, nan, 0, nan, "error", f"{type(exc).__name__}: {exc}"))
    return out


def phase_scan_csv(rows: list[PhaseVerdict]) -> str:
    lines = ["alpha,m,disk_E,split_E,quartic,verdict"]
    for r in rows:
        lines.append(f"{r.alpha:.17g},{r.m:.17g},{r.disk_energy:.17g},{r.best_two_disk_energy:.17g},{r.quartic:.17g},{r.verdict}")
    return "\n".join(lines) + "\n"
