import math

import numpy as np
import pytest

from rieszshape import critical, minimize
from rieszshape.domain import DiskSystem, EllipseDomain, StarDomain, area, dilate, isoperimetric_deficit
from rieszshape.errors import InvalidDomainError, ParameterError, StepCollapseError
from rieszshape.minimize import (
    FlowConfig,
    best_split,
    chain_ansatz_energy,
    chain_energy_bound,
    cut_delta,
    cut_part_energy,
    diameter_bounds_check,
    el_residual,
    erase_dilate_gain,
    gradient_flow,
    interpolation_ratio,
    line_cut_test,
    phase_scan,
    phase_scan_csv,
    renormalized_energy,
    shape_gradient,
)
from rieszshape.riesz import ball_energy_closed, nonlocal_energy, total_energy
from rieszshape.verify import random_star


def test_renormalized_energy_is_rescaled_energy(star):
    alpha, m = 1.3, 2.7
    base = dilate(star, math.sqrt(math.pi / area(star)))
    R = math.sqrt(m / math.pi)
    eps = critical.eps_of_mass(m, alpha)
    lhs = R * renormalized_energy(base, alpha, eps).total
    assert lhs == pytest.approx(total_energy(dilate(base, R), alpha).total, rel=1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_shape_derivative_against_central_differences(seed):
    rng = np.random.default_rng(seed)
    dom = random_star(rng)
    alpha, eps = rng.uniform(0.3, 1.7), rng.uniform(0.1, 1.0)
    n = dom.n_modes
    k = np.arange(1, n + 1)
    wa = np.r_[0.0, rng.normal(size=n) / k**2]
    wb = rng.normal(size=n) / k**2
    th = dom.theta_grid(512)
    w = np.cos(np.outer(th, k)) @ wa[1:] + np.sin(np.outer(th, k)) @ wb
    wa[0] = -np.sum((1 + dom.rho(th)) * w) / np.sum(1 + dom.rho(th))

    def energy(tau):
        return renormalized_energy(dom.with_coefficients(a=dom.a + tau * wa, b=dom.b + tau * wb), alpha, eps).total

    h = 1e-4
    fd = (energy(h) - energy(-h)) / (2 * h)
    sg = shape_gradient(dom, alpha, eps, n_theta=512)
    dr = dom.r0 * (wa[0] + np.cos(np.outer(sg.theta, k)) @ wa[1:] + np.sin(np.outer(sg.theta, k)) @ wb)
    assert np.mean(sg.g * sg.radius * dr) * 2 * math.pi == pytest.approx(fd, rel=1e-5)


def test_shape_gradient_of_disk_is_constant():
    sg = shape_gradient(StarDomain.disk(1.0, n_modes=4), 1.0, 0.7)
    np.testing.assert_allclose(sg.kappa, 1.0, rtol=1e-14)
    np.testing.assert_allclose(sg.v, 4.0, rtol=1e-9)
    assert sg.mu == pytest.approx(1.0 + 2 * 0.7 * 4.0, rel=1e-9)
    assert np.max(np.abs(sg.g)) < 1e-9
    assert sg.boundary_mean(sg.kappa) == pytest.approx(1.0)


def test_el_residual_of_ellipse_is_positive():
    assert el_residual(StarDomain.from_ellipse(1.0, 0.5, 16), 1.0, 0.5) > 1e-2


def test_flow_rejects_non_star_and_bad_config():
    with pytest.raises(InvalidDomainError):
        gradient_flow(EllipseDomain(1.0, 0.3), 1.0, 0.5)
    with pytest.raises(ParameterError):
        gradient_flow(StarDomain.disk(1.0, n_modes=2), 1.0, -1.0)
    for kw in (dict(step=0.0), dict(mode_cap=1), dict(damping=1.0), dict(max_steps=-1)):
        with pytest.raises(ParameterError):
            FlowConfig(**kw)


def test_flow_relaxes_ellipse_to_disk_below_threshold():
    alpha = 1.0
    eps = critical.eps_of_mass(critical.mass_c2(alpha) / 2, alpha)
    res = gradient_flow(StarDomain.from_ellipse(1.0, 0.3, 16), alpha, eps, FlowConfig(mode_cap=16))
    assert res.converged and not res.split_suspected
    assert res.el_residual_history[-1] <= 1e-6
    assert isoperimetric_deficit(res.final) <= 1e-6
    assert area(res.final) == pytest.approx(math.pi, rel=1e-12)
    e = [x.total for x in res.energy_history]
    assert all(b <= a + 1e-12 * abs(a) for a, b in zip(e, e[1:]))
    assert res.energy == pytest.approx(renormalized_energy(StarDomain.disk(1.0, n_modes=2), alpha, eps).total, rel=1e-9)
    js = res.to_json()
    assert js["steps"] == res.steps and len(js["energy"]) == res.steps + 1


def test_flow_max_steps_zero_reports_start():
    res = gradient_flow(StarDomain.from_ellipse(1.0, 0.3, 8), 1.0, 0.5, FlowConfig(max_steps=0, mode_cap=8))
    assert res.steps == 0 and not res.converged
    assert len(res.el_residual_history) == 1


def test_flow_step_collapse(monkeypatch):
    real = minimize.renormalized_energy
    calls = {"n": 0}

    def rigged(dom, alpha, eps, cfg=None):
        calls["n"] += 1
        e = real(dom, alpha, eps, cfg)
        # every trial after the first evaluation looks worse
        if calls["n"] > 1:
            return minimize.EnergyBreakdown(e.perimeter, e.nonlocal_, e.total + 1.0, e.alpha, e.mass, e.err_estimate)
        return e

    monkeypatch.setattr(minimize, "renormalized_energy", rigged)
    with pytest.raises(StepCollapseError):
        gradient_flow(StarDomain.from_ellipse(1.0, 0.3, 8), 1.0, 0.5, FlowConfig(mode_cap=8))


def test_cut_delta_decomposition(star):
    u = np.array([1.0, 0.0])
    level = star.center[0] + 0.05
    delta, two_a, two_c = cut_delta(star, 1.0, u, level)
    n = nonlocal_energy(star, 1.0)
    parts = cut_part_energy(star, 1.0, u, level, "low") + cut_part_energy(star, 1.0, u, level, "high")
    assert two_c == pytest.approx(n - parts, rel=1e-10)
    assert delta == pytest.approx(two_a - two_c)


def test_cutting_small_disk_costs_energy():
    R = math.sqrt(critical.mass_c1(1.0) / 2 / math.pi)
    delta, two_a, _ = cut_delta(StarDomain.disk(R, n_modes=2), 1.0, (0.0, 1.0), 0.0)
    assert two_a == pytest.approx(4 * R, rel=1e-12)
    assert delta > 0


def test_line_cut_finds_gain_on_large_stadium():
    th = 2 * math.pi * np.arange(512) / 512
    r = 1.0 + 0.45 * np.cos(2 * th) + 0.1 * np.cos(4 * th)
    dom = StarDomain.from_radius_samples(r, 8)
    dom = dilate(dom, math.sqrt(30.0 / area(dom)))
    res = line_cut_test(dom, 1.0, n_s=7)
    assert res.gain > 0
    assert abs(res.direction[0]) == pytest.approx(1.0, abs=1e-6)
    assert res.delta.shape == res.s.shape == (7,)


def test_erase_dilate_matches_far_split():
    m, alpha = 5.0, 1.0
    r = math.sqrt(m / 2 / math.pi)
    ds = DiskSystem(((0.0, 0.0, r), (1e5, 0.0, r)))
    gain = erase_dilate_gain(ds, 1, alpha)
    expected = critical.two_disk_split_energy(m, 0.5, alpha) - critical.ball_total_energy(m, alpha)
    assert gain == pytest.approx(expected, abs=1e-3)
    with pytest.raises(ParameterError):
        erase_dilate_gain(DiskSystem.single(1.0), 0, alpha)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
def test_interpolation_ratio_dilation_invariant(star, alpha):
    r1 = interpolation_ratio(star, alpha)
    assert interpolation_ratio(dilate(star, 3.7), alpha) == pytest.approx(r1, rel=1e-10)
    disk = interpolation_ratio(StarDomain.disk(1.0, n_modes=2), alpha)
    nl = ball_energy_closed(1.0, alpha).nonlocal_
    assert disk == pytest.approx(math.pi / ((2 * math.pi) ** ((2 - alpha) / (3 - alpha)) * nl ** (1 / (3 - alpha))))


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
def test_chain_energy_linear_in_mass(alpha):
    per_mass = []
    for m in (10.0, 100.0, 1000.0):
        e = chain_ansatz_energy(m, alpha)
        assert e.mass == pytest.approx(m, rel=1e-12)
        assert e.total <= chain_energy_bound(m, alpha) + 1e-9
        per_mass.append((e.perimeter / m, e.nonlocal_ / m))
    per_mass = np.array(per_mass)
    # each component stays within a fixed multiple of the unit disk's energy per mass
    unit = ball_energy_closed(1.0, alpha).total / math.pi
    assert per_mass.sum(axis=1).max() <= 1.5 * unit
    assert per_mass.min() > 0.1


def test_chain_needs_mass_at_least_one():
    with pytest.raises(ParameterError):
        chain_ansatz_energy(0.5, 1.0)


@pytest.mark.parametrize("dom", [StarDomain.disk(1.5, n_modes=2), DiskSystem(((0, 0, 1), (5, 0, 1)))])
def test_diameter_bounds(dom):
    chk = diameter_bounds_check(dom, 1.0)
    assert chk.lower_ok and chk.upper_ok


def test_best_split_at_threshold_is_half():
    t, e = best_split(critical.mass_c1(1.0) * 1.5, 1.0)
    assert t == pytest.approx(0.5)
    assert e == pytest.approx(critical.two_disk_split_energy(critical.mass_c1(1.0) * 1.5, 0.5, 1.0))


def test_phase_scan_verdicts_and_csv():
    th = critical.thresholds(1.0)
    masses = [0.5 * th.m_c1, th.m_c1, 0.5 * (th.m_c1 + th.m_c2), th.m_c2, 1.5 * th.m_c2]
    rows = phase_scan([1.0], masses)
    assert [r.verdict for r in rows] == [
        "disk-global-candidate",
        "disk-global-candidate",
        "disk-not-global",
        "disk-not-global",
        "disk-locally-unstable",
    ]
    csv = phase_scan_csv(rows).splitlines()
    assert csv[0] == "alpha,m,disk_E,split_E,quartic,verdict"
    assert len(csv) == 6


def test_phase_scan_records_failing_cells():
    rows = phase_scan([2.5, 1.0], [1.0])
    assert rows[0].verdict == "error" and "ParameterError" in rows[0].error
    assert rows[1].error is None
