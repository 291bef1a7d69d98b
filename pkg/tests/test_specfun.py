import math

import mpmath
import pytest
import scipy.special as sc
from hypothesis import given, settings
from hypothesis import strategies as st

from rieszshape import specfun
from rieszshape.errors import ParameterError, PoleError


@pytest.mark.parametrize("x", [0.1, 0.5, 1.0, 1.5, 2.5, 7.3, 20.0, 150.0, -0.5, -1.5, -3.7])
def test_gamma_against_mpmath(x):
    ref = float(mpmath.gamma(x))
    # exp(loggamma) amplifies rounding by |loggamma|
    rel = 1e-13 * max(1.0, abs(math.lgamma(x)) / 50.0)
    assert specfun.gamma(x) == pytest.approx(ref, rel=rel)


@pytest.mark.parametrize("x", [0.0, -1.0, -2.0, -10.0])
def test_gamma_poles(x):
    with pytest.raises(PoleError):
        specfun.gamma(x)
    assert specfun.rgamma(x) == 0.0


@given(st.floats(min_value=0.05, max_value=40.0))
def test_gamma_recurrence(x):
    assert specfun.gamma(x + 1.0) == pytest.approx(x * specfun.gamma(x), rel=1e-13)


@given(st.floats(min_value=1e-3, max_value=1e6))
def test_loggamma_matches_stdlib(x):
    assert specfun.loggamma(x) == pytest.approx(math.lgamma(x), rel=1e-13, abs=1e-13)


@pytest.mark.parametrize("x", [0.25, 1.0, 2.0, 3.5, 10.0, 100.0, -0.5])
def test_digamma(x):
    assert specfun.digamma(x) == pytest.approx(float(mpmath.digamma(x)), rel=1e-13, abs=1e-14)


@given(st.floats(min_value=0.0, max_value=0.999999))
def test_elliptic_e_against_scipy(p):
    assert specfun.elliptic_e(p) == pytest.approx(float(sc.ellipe(p)), rel=2e-15)


def test_elliptic_e_domain():
    assert specfun.elliptic_e(1.0) == 1.0
    for bad in (-0.1, 1.1, float("nan")):
        with pytest.raises(ParameterError):
            specfun.elliptic_e(bad)


@settings(max_examples=200)
@given(
    st.floats(min_value=-2.0, max_value=2.0),
    st.floats(min_value=-2.0, max_value=2.0),
    st.floats(min_value=0.3, max_value=3.0),
    st.floats(min_value=-5.0, max_value=0.98),
)
def test_hyp2f1_against_mpmath(a, b, c, z):
    ref = float(mpmath.hyp2f1(a, b, c, z))
    assert specfun.hyp2f1(a, b, c, z) == pytest.approx(ref, rel=1e-10, abs=1e-12)


@pytest.mark.parametrize(
    "a, b, c",
    [
        # c - a - b integer: logarithmic branches of the 1 - z transformation
        (0.5, 0.5, 1.0),
        (1.0, 1.0, 2.0),
        (-0.25, 0.25, 1.0),
        (0.75, 0.75, 2.0),
        (0.3, 0.7, 3.0),
    ],
)
@pytest.mark.parametrize("z", [0.6, 0.9, 0.99, 0.999999])
def test_hyp2f1_degenerate_cases(a, b, c, z):
    ref = float(mpmath.hyp2f1(a, b, c, z))
    assert specfun.hyp2f1(a, b, c, z) == pytest.approx(ref, rel=1e-11)


def test_hyp2f1_rejects_bad_arguments():
    with pytest.raises(ParameterError):
        specfun.hyp2f1(1.0, 1.0, 2.0, 1.0)
    with pytest.raises(ParameterError):
        specfun.hyp2f1(1.0, 1.0, -2.0, 0.5)


def test_hyp2f1_terminating_series():
    # 2F1(-2, b; c; z) is a quadratic
    b, c, z = 1.5, 2.5, 0.7
    expected = 1 - 2 * b / c * z + b * (b + 1) / (c * (c + 1)) * z * z
    assert specfun.hyp2f1(-2.0, b, c, z) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("alpha", [0.05, 1.0, 1.95])
def test_check_alpha_accepts_window(alpha):
    assert specfun.check_alpha(alpha) == alpha


@pytest.mark.parametrize("alpha", [0.0, 0.04, 1.96, 2.0, 2.5, float("nan")])
def test_check_alpha_rejects(alpha):
    with pytest.raises(ParameterError):
        specfun.check_alpha(alpha)
