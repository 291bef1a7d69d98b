"""Invariant suites behind the ``verify`` command.

Every check compares a computed value with an independent reference and
records the discrepancy next to its tolerance.  Random inputs are drawn from
a generator seeded by the caller, so reports are reproducible byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import critical, specfun
from .domain import (
    DiskSystem,
    EllipseDomain,
    StarDomain,
    area,
    barycenter,
    cut_profile,
    dilate,
    isoperimetric_deficit,
    perimeter,
)
from .minimize import (
    chain_ansatz_energy,
    cut_delta,
    el_residual,
    interpolation_ratio,
    renormalized_energy,
    shape_gradient,
)
from .riesz import (
    QuadratureConfig,
    ball_energy_closed,
    ball_potential_closed,
    disk_system_energy,
    ellipse_energy_closed,
    mc_nonlocal_oracle,
    nonlocal_energy,
    potential_at,
)

__all__ = ["Check", "VerifyReport", "SUITES", "run_suite", "run", "random_star"]

SUITES = ("specfun", "domain", "riesz", "critical", "minimize")


@dataclass(frozen=True)
class Check:
    """One comparison; ``error`` is already in the units of ``tol``."""

    suite: str
    name: str
    value: float
    reference: float
    error: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(math.isfinite(self.error) and self.error <= self.tol)


@dataclass(frozen=True)
class VerifyReport:
    checks: tuple[Check, ...]
    seed: int

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def n_failed(self) -> int:
        return sum(not c.passed for c in self.checks)

    def table(self) -> str:
        head = f"{'suite':<9} {'check':<44} {'value':>24} {'reference':>24} {'error':>10} {'tol':>8}  status"
        lines = [f"# verify seed={self.seed}", head]
        for c in self.checks:
            lines.append(
                f"{c.suite:<9} {c.name:<44} {c.value:>24.17g} {c.reference:>24.17g} "
                f"{c.error:>10.3e} {c.tol:>8.1e}  {'PASS' if c.passed else 'FAIL'}"
            )
        total = len(self.checks)
        lines.append(f"# {total - self.n_failed}/{total} checks passed")
        return "\n".join(lines) + "\n"


def _rel(suite, name, value, ref, tol) -> Check:
    value, ref = float(value), float(ref)
    scale = abs(ref) if ref != 0.0 else 1.0
    return Check(suite, name, value, ref, abs(value - ref) / scale, tol)


def _abs(suite, name, value, ref, tol) -> Check:
    value, ref = float(value), float(ref)
    return Check(suite, name, value, ref, abs(value - ref), tol)


def _at_most(suite, name, value, bound) -> Check:
    """value <= bound; the error is the violation."""
    value, bound = float(value), float(bound)
    return Check(suite, name, value, bound, max(0.0, value - bound), 0.0)


def random_star(rng: np.random.Generator, n_modes: int = 6, amp: float = 0.2) -> StarDomain:
    """Smooth random star domain with Fourier coefficients decaying like k^-2."""
    k = np.arange(1, n_modes + 1)
    a = np.zeros(n_modes + 1)
    a[1:] = rng.normal(size=n_modes) * amp / k**2
    b = rng.normal(size=n_modes) * amp / k**2
    center = tuple(0.1 * rng.normal(size=2))
    return StarDomain(center, rng.uniform(0.7, 1.4), a, b)


def _specfun(rng, cfg) -> list[Check]:
    s = "specfun"
    return [
        _rel(s, "gamma(1/2) = sqrt(pi)", specfun.gamma(0.5), math.sqrt(math.pi), 1e-14),
        _rel(s, "gamma(5) = 24", specfun.gamma(5.0), 24.0, 1e-14),
        _rel(s, "gamma(-1/2) = -2 sqrt(pi)", specfun.gamma(-0.5), -2.0 * math.sqrt(math.pi), 1e-14),
        _rel(s, "loggamma(100)", specfun.loggamma(100.0), math.lgamma(100.0), 1e-14),
        _rel(s, "digamma(1) = -euler_gamma", specfun.digamma(1.0), -0.57721566490153286, 1e-14),
        _rel(s, "elliptic_e(0) = pi/2", specfun.elliptic_e(0.0), math.pi / 2.0, 1e-15),
        _rel(s, "elliptic_e(1) = 1", specfun.elliptic_e(1.0), 1.0, 1e-15),
        _rel(s, "elliptic_e(1/2)", specfun.elliptic_e(0.5), 1.3506438810476755, 1e-14),
        _rel(s, "2F1(1,1;2;1/2) = 2 ln 2", specfun.hyp2f1(1.0, 1.0, 2.0, 0.5), 2.0 * math.log(2.0), 1e-14),
        _rel(s, "2F1(1,1;2;0.9) = -ln(0.1)/0.9", specfun.hyp2f1(1.0, 1.0, 2.0, 0.9), -math.log(0.1) / 0.9, 1e-13),
        _rel(s, "2F1(1/2,1/2;3/2;1/4) = pi/3", specfun.hyp2f1(0.5, 0.5, 1.5, 0.25), math.pi / 3.0, 1e-14),
        _rel(s, "2F1(1,1;2;-3) = ln(4)/3", specfun.hyp2f1(1.0, 1.0, 2.0, -3.0), math.log(4.0) / 3.0, 1e-14),
    ]


def _domain(rng, cfg) -> list[Check]:
    s = "domain"
    disk = StarDomain.disk(1.0, n_modes=4)
    star = StarDomain.from_ellipse(1.0, 0.6, 32)
    ell = EllipseDomain(1.0, 0.6)
    dom = random_star(rng)
    lam = 1.7
    prof = cut_profile(dom, (0.6, 0.8))
    shifted = StarDomain.disk(1.0, center=(0.3, -0.2), n_modes=4)
    bx, by = barycenter(shifted)
    return [
        _rel(s, "disk area = pi", area(disk), math.pi, 1e-14),
        _rel(s, "disk perimeter = 2 pi", perimeter(disk), 2.0 * math.pi, 1e-14),
        _abs(s, "disk deficit = 0", isoperimetric_deficit(disk), 0.0, 1e-14),
        _rel(s, "polar ellipse area (e=0.6)", area(star), area(ell), 1e-10),
        _rel(s, "polar ellipse perimeter (e=0.6)", perimeter(star), perimeter(ell), 1e-10),
        _rel(s, "area scales as lambda^2", area(dilate(dom, lam)), lam**2 * area(dom), 1e-13),
        _rel(s, "perimeter scales as lambda", perimeter(dilate(dom, lam)), lam * perimeter(dom), 1e-13),
        _rel(s, "cut profile total volume", prof.V[-1], area(dom), 1e-6),
        _abs(s, "barycenter of shifted disk (x)", bx, 0.3, 1e-14),
        _abs(s, "barycenter of shifted disk (y)", by, -0.2, 1e-14),
    ]


def _riesz(rng, cfg) -> list[Check]:
    s = "riesz"
    out = []
    for alpha in (0.5, 1.0, 1.5):
        ref = ball_energy_closed(1.0, alpha).nonlocal_
        val = nonlocal_energy(StarDomain.disk(1.0, n_modes=4), alpha, cfg)
        out.append(_rel(s, f"disk nonlocal, alpha={alpha}", val, ref, 1e-6))
    out.append(_rel(s, "disk nonlocal = 16 pi/3 (alpha=1)", ball_energy_closed(1.0, 1.0).nonlocal_, 16 * math.pi / 3, 1e-13))
    for e in (0.3, 0.6):
        val = nonlocal_energy(EllipseDomain(1.0, e), 1.0, cfg)
        out.append(_rel(s, f"ellipse nonlocal, e={e}", val, ellipse_energy_closed(1.0, e, 1.0).nonlocal_, 1e-5))
    disk = StarDomain.disk(1.0, n_modes=4)
    r = np.array([0.0, 0.5, 1.0, 2.0])
    v = potential_at(disk, 1.0, np.column_stack([r, np.zeros_like(r)]), cfg)
    out.append(_rel(s, "v(0) = 2 pi (alpha=1)", v[0], 2.0 * math.pi, 1e-7))
    out.append(_rel(s, "v(1/2) (alpha=1)", v[1], ball_potential_closed(0.5, 1.0), 1e-7))
    out.append(_rel(s, "v(1) = 4 (alpha=1)", v[2], 4.0, 1e-7))
    out.append(_rel(s, "v(2) (alpha=1)", v[3], ball_potential_closed(2.0, 1.0), 1e-7))
    ds = DiskSystem(((0.0, 0.0, 1.0), (100.0, 0.0, 1.0)))
    e2 = disk_system_energy(ds, 1.0)
    out.append(_at_most(s, "two disks: lower bracket <= energy", e2.lower_bracket, e2.total))
    out.append(_at_most(s, "two disks: energy <= upper bracket", e2.total, e2.upper_bracket))
    dom = random_star(rng)
    q = nonlocal_energy(dom, 1.0, cfg)
    est, se = mc_nonlocal_oracle(dom, 1.0, n=cfg.mc_samples, seed=int(rng.integers(2**31)), config=cfg)
    out.append(Check(s, "Monte Carlo agreement (std errors)", est, q, abs(est - q) / se, 3.0))
    return out


_ALPHA_GRID = tuple(np.round(np.linspace(0.1, 1.9, 19), 12))


def _critical(rng, cfg) -> list[Check]:
    s = "critical"
    out = [
        _rel(s, "m_c1(1) = 3 sqrt2 pi / 8", critical.mass_c1(1.0), 3.0 * math.sqrt(2.0) * math.pi / 8.0, 1e-10),
        _rel(s, "m_c2(1) = 9 pi / 8", critical.mass_c2(1.0), 9.0 * math.pi / 8.0, 1e-10),
    ]
    d1 = max(abs(critical.mass_c1(a) - critical.mass_c1_by_root(a)) / critical.mass_c1(a) for a in _ALPHA_GRID)
    d2 = max(abs(critical.mass_c2(a) - critical.mass_c2_by_root(a)) / critical.mass_c2(a) for a in _ALPHA_GRID)
    out.append(Check(s, "m_c1 vs two-disk root (max over alpha)", d1, 0.0, d1, 1e-9))
    out.append(Check(s, "m_c2 vs quartic root (max over alpha)", d2, 0.0, d2, 1e-9))
    gap = max(critical.mass_c1(a) - critical.mass_c2(a) for a in _ALPHA_GRID)
    out.append(_at_most(s, "m_c1 < m_c2 (max of m_c1 - m_c2)", gap, 0.0))
    t = np.linspace(0.0, 0.5, 10_000)
    for a in (0.1, 0.5, 1.0, 1.5, 1.9):
        fmin = float(np.min(critical.two_disk_excess_grid(t, 1.0, a)[1]))
        out.append(Check(s, f"min_t F(t, 1) >= -1e-12, alpha={a}", fmin, -1e-12, max(0.0, -1e-12 - fmin), 0.0))
        f_half = critical.two_disk_excess(0.5, 1.05, a).F
        out.append(_at_most(s, f"F(1/2, 1.05) < 0, alpha={a}", f_half, -1e-300))
    return out


def _minimize(rng, cfg) -> list[Check]:
    s = "minimize"
    out = []
    dom = random_star(rng)
    alpha, eps = 1.0, 0.5
    n = dom.n_modes
    k = np.arange(1, n + 1)
    wa = np.zeros(n + 1)
    wa[1:] = rng.normal(size=n) / k**2
    wb = rng.normal(size=n) / k**2
    th = dom.theta_grid(512)
    w = wa[0] + np.cos(np.outer(th, k)) @ wa[1:] + np.sin(np.outer(th, k)) @ wb
    rho = dom.rho(th)
    # mass-neutral to first order: int r dr dtheta = 0
    wa[0] -= np.sum((1.0 + rho) * w) / np.sum(1.0 + rho)
    h = 1e-4

    def energy(tau):
        return renormalized_energy(dom.with_coefficients(a=dom.a + tau * wa, b=dom.b + tau * wb), alpha, eps, cfg).total

    fd = (energy(h) - energy(-h)) / (2.0 * h)
    sg = shape_gradient(dom, alpha, eps, cfg, 512)
    dr = dom.r0 * (wa[0] + np.cos(np.outer(sg.theta, k)) @ wa[1:] + np.sin(np.outer(sg.theta, k)) @ wb)
    out.append(_rel(s, "shape derivative vs central difference", np.mean(sg.g * sg.radius * dr) * 2.0 * math.pi, fd, 1e-4))
    out.append(_abs(s, "disk is critical (EL residual)", el_residual(StarDomain.disk(1.0, n_modes=4), alpha, eps, cfg), 0.0, 1e-9))
    r1 = interpolation_ratio(dom, alpha, cfg)
    r2 = interpolation_ratio(dilate(dom, 2.5), alpha, cfg)
    out.append(_rel(s, "interpolation ratio dilation invariance", r2, r1, 1e-8))
    ratios = [chain_ansatz_energy(m, alpha).total / m for m in (10.0, 100.0, 1000.0)]
    out.append(_at_most(s, "chain energy / m bounded (max ratio)", max(ratios), 2.0 * ball_energy_closed(1.0, alpha).total / math.pi))
    m_half = critical.mass_c1(alpha) / 2.0
    delta, _, _ = cut_delta(StarDomain.disk(math.sqrt(m_half / math.pi), n_modes=4), alpha, (1.0, 0.0), 0.0, cfg)
    out.append(_at_most(s, "cutting a small disk costs energy (-Delta)", -delta, 0.0))
    m2 = critical.mass_c2(alpha)
    coeff = []
    for f in (0.99, 1.01):
        R = math.sqrt(f * m2 / math.pi)
        e = 1e-2
        c = (ellipse_energy_closed(R, e, alpha).total - ball_energy_closed(R, alpha).total) / e**4
        coeff.append(c)
        out.append(_rel(s, f"e^4 coefficient at {f} m_c2", c, critical.quartic_coeff(f * m2, alpha), 1e-2))
    out.append(_at_most(s, "e^4 coefficient changes sign at m_c2", coeff[0] * coeff[1], 0.0))
    return out


_RUNNERS = {
    "specfun": _specfun,
    "domain": _domain,
    "riesz": _riesz,
    "critical": _critical,
    "minimize": _minimize,
}


def run_suite(name: str, seed: int = 12345, cfg: QuadratureConfig | None = None) -> list[Check]:
    if name not in _RUNNERS:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or all")
    cfg = QuadratureConfig() if cfg is None else cfg
    # one independent stream per suite so suites give the same numbers alone or together
    rng = np.random.default_rng([int(seed), SUITES.index(name)])
    return _RUNNERS[name](rng, cfg)


def run(suite: str = "all", seed: int = 12345, cfg: QuadratureConfig | None = None) -> VerifyReport:
    names = SUITES if suite == "all" else (suite,)
    checks = []
    for name in names:
        checks.extend(run_suite(name, seed, cfg))
    return VerifyReport(tuple(checks), int(seed))
