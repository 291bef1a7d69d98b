import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rieszshape.domain import DiskSystem, EllipseDomain, StarDomain, dilate
from rieszshape.errors import ParameterError, ToleranceError
from rieszshape.riesz import (
    QuadratureConfig,
    ball_boundary_slope,
    ball_energy_closed,
    ball_potential_closed,
    ball_potential_constant,
    ball_potential_near_boundary,
    ball_singular_coeff,
    disk_system_energy,
    ellipse_energy_closed,
    mc_nonlocal_oracle,
    nonlocal_energy,
    potential_at,
    total_energy,
)


def _ball_mp(R, alpha):
    g = mpmath.gamma
    return float(2 * mpmath.pi**2 * g(2 - alpha) * R ** (4 - alpha) / (g(2 - alpha / 2) * g(3 - alpha / 2)))


@pytest.mark.parametrize("alpha", [0.05, 0.5, 1.0, 1.5, 1.95])
@pytest.mark.parametrize("R", [0.3, 1.0, 2.5])
def test_disk_quadrature_vs_closed_form(alpha, R):
    val = nonlocal_energy(StarDomain.disk(R, n_modes=2), alpha)
    assert val == pytest.approx(_ball_mp(R, alpha), rel=1e-10)
    assert ball_energy_closed(R, alpha).nonlocal_ == pytest.approx(_ball_mp(R, alpha), rel=1e-13)


def test_disk_alpha_one_value():
    assert ball_energy_closed(1.0, 1.0).nonlocal_ == pytest.approx(16 * math.pi / 3, rel=1e-14)
    assert ball_energy_closed(1.0, 1.0).total == pytest.approx(2 * math.pi + 16 * math.pi / 3, rel=1e-14)


@pytest.mark.parametrize("e", [0.0, 0.3, 0.6, 0.9])
@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
def test_ellipse_quadrature_vs_closed_form(e, alpha):
    ref = ellipse_energy_closed(1.0, e, alpha).nonlocal_
    assert nonlocal_energy(EllipseDomain(1.0, e), alpha) == pytest.approx(ref, rel=1e-10)
    assert nonlocal_energy(StarDomain.from_ellipse(1.0, e, 48), alpha) == pytest.approx(ref, rel=1e-8 if e < 0.9 else 1e-6)


def test_ellipse_closed_form_reduces_to_disk():
    for alpha in (0.3, 1.0, 1.7):
        a = ellipse_energy_closed(1.4, 0.0, alpha)
        b = ball_energy_closed(1.4, alpha)
        assert a.total == b.total


@settings(max_examples=10)
@given(st.floats(0.3, 3.0), st.sampled_from([0.5, 1.0, 1.5]))
def test_nonlocal_scaling(lam, alpha):
    d = StarDomain.from_ellipse(1.0, 0.4, 8)
    ratio = nonlocal_energy(dilate(d, lam), alpha) / nonlocal_energy(d, alpha)
    assert ratio == pytest.approx(lam ** (4 - alpha), rel=1e-10)


def test_translation_invariance(star):
    moved = star.with_coefficients(center=(star.center[0] + 5.0, star.center[1] - 2.0))
    assert nonlocal_energy(moved, 1.2) == pytest.approx(nonlocal_energy(star, 1.2), rel=1e-12)


@pytest.mark.parametrize("alpha", [0.3, 1.0, 1.7])
@pytest.mark.parametrize("r", [0.0, 0.5, 0.9, 0.99, 0.999999, 1.0, 1.000001, 1.01, 1.1, 2.0, 10.0])
def test_disk_potential_vs_closed_form(alpha, r):
    v = potential_at(StarDomain.disk(1.0, n_modes=2), alpha, [[r * math.cos(0.3), r * math.sin(0.3)]])[0]
    assert v == pytest.approx(ball_potential_closed(r, alpha), rel=1e-9)


def _disk_potential_mp(r, alpha):
    """Polar coordinates about x: v = (2-alpha)^-1 int rho_+^(2-alpha) - rho_-^(2-alpha) dphi."""
    p = 2 - alpha
    if r < 1:
        f = lambda phi: (-r * mpmath.cos(phi) + mpmath.sqrt(1 - (r * mpmath.sin(phi)) ** 2)) ** p
        return float(2 * mpmath.quad(f, [0, mpmath.pi]) / p)
    top = mpmath.asin(1 / mpmath.mpf(r))

    def f(phi):
        root = mpmath.sqrt(max(0, 1 - (r * mpmath.sin(phi)) ** 2))
        c = r * mpmath.cos(phi)
        return (c + root) ** p - (c - root) ** p

    return float(2 * mpmath.quad(f, [0, top]) / p)


@pytest.mark.parametrize("alpha", [0.3, 1.0, 1.7])
@pytest.mark.parametrize("r", [0.2, 0.7, 0.95, 1.05, 3.0])
def test_disk_potential_closed_form_vs_mpmath(alpha, r):
    assert ball_potential_closed(r, alpha) == pytest.approx(_disk_potential_mp(r, alpha), rel=1e-10)


def test_disk_potential_special_values():
    assert ball_potential_closed(0.0, 1.0) == pytest.approx(2 * math.pi, rel=1e-15)
    assert ball_potential_closed(1.0, 1.0) == pytest.approx(4.0, rel=1e-15)
    assert ball_potential_constant(1.0) == pytest.approx(4.0, rel=1e-15)


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
@pytest.mark.parametrize("sign", [1.0, -1.0])
def test_boundary_slope_below_one(alpha, sign):
    """Difference quotients approach the slope with relative error ~ |r|^(1 - alpha)."""
    v0 = ball_potential_constant(alpha)
    s = ball_boundary_slope(alpha)
    errs = [abs((ball_potential_closed(1 + sign * r, alpha) - v0) / (sign * r) / s - 1) for r in (1e-3, 1e-5, 1e-7)]
    assert errs[0] > errs[1] > errs[2]
    rate = math.log(errs[0] / errs[1]) / math.log(100.0)
    assert rate == pytest.approx(1 - alpha, abs=0.05)
    r = sign * 1e-7
    assert ball_potential_near_boundary(r, alpha) == pytest.approx(ball_potential_closed(1 + r, alpha), abs=0.05 * abs(r * s))


@pytest.mark.parametrize("r", [1e-5, -1e-5, 1e-6])
def test_boundary_expansion_at_one_including_constant(r):
    """The linear-in-r correction -r(2 ln|r|^-1 - 2 + 3 ln 4) is exact to O(r^2 ln r)."""
    v = ball_potential_closed(1 + r, 1.0)
    approx = ball_potential_near_boundary(r, 1.0)
    assert abs(v - approx) < 20 * r * r * math.log(1 / abs(r))
    # dropping the constant spoils the agreement by |r| (3 ln 4 - 2)
    crude = 4.0 - r * 2 * math.log(1 / abs(r))
    assert abs(v - crude) > 0.5 * abs(r) * (3 * math.log(4) - 2)


@pytest.mark.parametrize("alpha", [1.2, 1.5, 1.8])
def test_boundary_expansion_above_one_converges(alpha):
    """The relative size of the next term decays like |r|^(alpha - 1)."""
    v0 = ball_potential_constant(alpha)
    c = ball_singular_coeff(alpha)
    errs = []
    for r in (1e-3, 1e-5, 1e-7):
        ratio = (v0 - ball_potential_closed(1 + r, alpha)) / (c * r ** (2 - alpha))
        errs.append(abs(ratio - 1))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 0.1
    rate = math.log(errs[0] / errs[1]) / math.log(100.0)
    assert rate == pytest.approx(alpha - 1, abs=0.1)


@pytest.mark.parametrize(
    "alpha, radii",
    [
        (1.5, (1e-2, -1e-2, 1e-3, -1e-3)),
        # the next term is only |r|^0.2 smaller, so 10% needs |r| <= 1e-5
        (1.2, (1e-5, -1e-5, 1e-6, -1e-6, 1e-8, -1e-8)),
    ],
)
def test_boundary_expansion_above_one_within_ten_percent(alpha, radii):
    v0 = ball_potential_constant(alpha)
    c = ball_singular_coeff(alpha)
    for r in radii:
        ratio = (v0 - ball_potential_closed(1 + r, alpha)) / (c * abs(r) ** (1 - alpha) * r)
        assert ratio == pytest.approx(1.0, abs=0.1)


def test_boundary_expansion_alpha_1_2_misses_ten_percent_at_1e_2():
    v0 = ball_potential_constant(1.2)
    c = ball_singular_coeff(1.2)
    ratio = (v0 - ball_potential_closed(1.01, 1.2)) / (c * 0.01 ** (2 - 1.2))
    assert 0.6 < ratio < 0.75


def test_boundary_expansion_argument_checks():
    with pytest.raises(ParameterError):
        ball_boundary_slope(1.5)
    with pytest.raises(ParameterError):
        ball_singular_coeff(0.5)


def test_potential_is_superharmonic_inside(star):
    """v is maximal on average at interior points: mean over a small circle < centre value."""
    c = np.asarray(star.center)
    ring = c + 0.05 * np.column_stack([np.cos(np.arange(16)), np.sin(np.arange(16))])
    v = potential_at(star, 1.0, np.vstack([c, ring]))
    assert v[1:].mean() < v[0]


def test_total_energy_routes_closed_forms():
    e = total_energy(DiskSystem.single(2.0), 0.7)
    assert e.total == ball_energy_closed(2.0, 0.7).total
    assert e.err_estimate == 0.0
    f = total_energy(StarDomain.disk(2.0, n_modes=2), 0.7)
    assert f.total == pytest.approx(e.total, rel=1e-12)
    assert set(f.to_json()) == {"perimeter", "nonlocal", "total", "alpha", "mass", "err_estimate"}


def test_tolerance_error_is_raised():
    wiggly = StarDomain((0, 0), 1.0, np.r_[0.0, np.zeros(39), 0.3], np.zeros(40))
    with pytest.raises(ToleranceError) as info:
        nonlocal_energy(wiggly, 1.0, QuadratureConfig(boundary_panels=64, tol=1e-15))
    assert info.value.estimate > 0


def test_quadrature_config_validation():
    with pytest.raises(ParameterError):
        QuadratureConfig(boundary_panels=32)
    with pytest.raises(ParameterError):
        QuadratureConfig(tol=0.0)


def test_mc_oracle_on_disk():
    est, se = mc_nonlocal_oracle(StarDomain.disk(1.0, n_modes=2), 1.5, n=200_000, seed=4)
    assert abs(est - _ball_mp(1.0, 1.5)) < 4 * se
    assert se / est < 0.01


def test_mc_oracle_reproducible_and_guarded(star):
    a = mc_nonlocal_oracle(star, 1.0, n=20_000, seed=9)
    b = mc_nonlocal_oracle(star, 1.0, n=20_000, seed=9)
    assert a == b
    with pytest.raises(ParameterError):
        mc_nonlocal_oracle(star, 1.0, n=100)


def test_two_far_disks_approach_point_masses():
    d = 200.0
    e = disk_system_energy(DiskSystem(((0, 0, 1), (d, 0, 1))), 1.0)
    assert e.interaction == pytest.approx(2 * math.pi**2 / d, rel=1e-4)
    assert e.lower_bracket <= e.total <= e.upper_bracket


def test_disk_pair_against_generic_quadrature():
    ds = DiskSystem(((0, 0, 1.0), (2.5, 0.3, 0.6)))
    e = disk_system_energy(ds, 1.3)
    # same pair as two separate StarDomain boundaries fed to the boundary rule
    from rieszshape.domain import boundary_pieces
    from rieszshape.quadrature import nonlocal_from_pieces

    a = boundary_pieces(StarDomain.disk(1.0, n_modes=2))
    b = boundary_pieces(StarDomain.disk(0.6, center=(2.5, 0.3), n_modes=2))
    spec = QuadratureConfig().rule_for(StarDomain.disk(1.0, n_modes=2))
    cross, _ = nonlocal_from_pieces(a, b, 1.3, spec)
    assert e.interaction == pytest.approx(2 * cross, rel=1e-10)
