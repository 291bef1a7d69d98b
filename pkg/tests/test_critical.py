import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rieszshape import critical
from rieszshape.errors import ParameterError
from rieszshape.riesz import ball_energy_closed, ellipse_energy_closed

ALPHAS = np.round(np.linspace(0.05, 1.95, 39), 12)


def test_alpha_one_values():
    assert critical.mass_c1(1.0) == pytest.approx(3 * math.sqrt(2) * math.pi / 8, rel=1e-14)
    assert critical.mass_c2(1.0) == pytest.approx(9 * math.pi / 8, rel=1e-14)


def _mass_c1_mp(alpha):
    a = mpmath.mpf(alpha)
    g = mpmath.gamma
    inner = (mpmath.sqrt(2) - 1) * g(2 - a / 2) * g(3 - a / 2) / (mpmath.pi * (1 - 2 ** ((a - 2) / 2)) * g(2 - a))
    return float(mpmath.pi * inner ** (2 / (3 - a)))


def _mass_c2_mp(alpha):
    a = mpmath.mpf(alpha)
    g = mpmath.gamma
    inner = 3 * g(2 - a / 2) * g(3 - a / 2) / (mpmath.pi * a * g(3 - a))
    return float(mpmath.pi * inner ** (2 / (3 - a)))


@pytest.mark.parametrize("alpha", ALPHAS)
def test_thresholds_against_mpmath_and_roots(alpha):
    assert critical.mass_c1(alpha) == pytest.approx(_mass_c1_mp(alpha), rel=1e-13)
    assert critical.mass_c2(alpha) == pytest.approx(_mass_c2_mp(alpha), rel=1e-13)
    assert critical.mass_c1_by_root(alpha) == pytest.approx(critical.mass_c1(alpha), rel=1e-12)
    assert critical.mass_c2_by_root(alpha) == pytest.approx(critical.mass_c2(alpha), rel=1e-12)
    assert critical.mass_c1(alpha) < critical.mass_c2(alpha)


@pytest.mark.parametrize("alpha", [0.3, 1.0, 1.7])
def test_mass_c1_is_where_one_disk_equals_two_halves(alpha):
    m = critical.mass_c1(alpha)
    assert critical.two_disk_split_energy(m, 0.5, alpha) == pytest.approx(critical.ball_total_energy(m, alpha), rel=1e-13)
    assert critical.two_disk_excess(0.5, 1.0, alpha).F == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("alpha", [0.1, 0.5, 1.0, 1.5, 1.9])
def test_split_excess_nonnegative_at_threshold(alpha):
    t = np.linspace(0.0, 0.5, 10_000)
    ft, f = critical.two_disk_excess_grid(t, 1.0, alpha)
    assert f.min() >= -1e-12
    np.testing.assert_allclose(f, ft - ft[0], atol=1e-13)
    assert critical.two_disk_excess(0.5, 1.05, alpha).F < 0


@given(st.floats(0.0, 0.5), st.floats(0.05, 1.95), st.floats(0.1, 3.0))
def test_excess_is_rescaled_energy_difference(t, alpha, mu):
    m = mu * critical.mass_c1(alpha)
    diff = critical.two_disk_split_energy(m, t, alpha) - critical.ball_total_energy(m, alpha)
    f = critical.two_disk_excess(t, mu, alpha).F
    assert f * 2 * math.sqrt(math.pi * m) == pytest.approx(diff, rel=1e-9, abs=1e-12 * math.sqrt(m))


@given(st.floats(0.05, 1.95), st.floats(0.01, 100.0))
def test_ball_energy_consistent(alpha, m):
    R = math.sqrt(m / math.pi)
    assert critical.ball_total_energy(m, alpha) == pytest.approx(ball_energy_closed(R, alpha).total, rel=1e-13)


@given(st.floats(0.05, 1.95), st.floats(0.01, 100.0))
def test_eps_mass_round_trip(alpha, m):
    assert critical.mass_of_eps(critical.eps_of_mass(m, alpha), alpha) == pytest.approx(m, rel=1e-13)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
@pytest.mark.parametrize("factor", [0.5, 0.99, 1.01, 2.0])
def test_quartic_coeff_against_ellipse_expansion(alpha, factor):
    """Fourth-order Richardson on the exact ellipse energy recovers the e^4 coefficient."""
    m = factor * critical.mass_c2(alpha)
    R = math.sqrt(m / math.pi)
    mpmath.mp.dps = 30
    g = lambda e: (ellipse_energy_closed(R, e, alpha).total - ball_energy_closed(R, alpha).total) / e**4
    fd = (4 * g(0.01) - g(0.02)) / 3
    q = critical.quartic_coeff(m, alpha)
    mpmath.mp.dps = 15
    assert fd == pytest.approx(q, rel=1e-3, abs=1e-6 * R)
    assert np.sign(q) == (1 if factor < 1 else -1)


def test_quartic_zero_is_mass_c2():
    for alpha in (0.2, 1.0, 1.8):
        assert critical.quartic_coeff(critical.mass_c2(alpha), alpha) == pytest.approx(0.0, abs=1e-13)


def test_split_coupling_at_alpha_one():
    assert critical.split_coupling(1.0) == pytest.approx(math.sqrt(2), rel=1e-14)


def test_thresholds_table():
    rows = critical.critical_table([0.5, 1.0])
    assert [r.alpha for r in rows] == [0.5, 1.0]
    assert rows[1].eps_c1 == pytest.approx(critical.eps_of_mass(rows[1].m_c1, 1.0))


@pytest.mark.parametrize("bad", [-0.1, 0.6, float("nan")])
def test_t_range(bad):
    with pytest.raises(ParameterError):
        critical.two_disk_excess(bad, 1.0, 1.0)


def test_alpha_range():
    for bad in (0.0, 2.0):
        with pytest.raises(ParameterError):
            critical.mass_c1(bad)
