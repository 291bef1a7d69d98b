"""Real-argument special functions used by the closed-form energy formulas.

Conventions
-----------
``elliptic_e(p)`` uses the PARAMETER convention::

    E(p) = integral_0^{pi/2} sqrt(1 - p sin^2 t) dt,    p = e^2,

so the perimeter of an ellipse with eccentricity ``e`` and major semi-axis
``a`` is ``4 a E(e^2)``.  This matches ``scipy.special.ellipe`` and
mpmath's ``ellipe`` but differs from libraries keyed on the modulus ``k``.

All functions are pure and operate on Python floats.
"""

from __future__ import annotations

import math

from .errors import ConvergenceError, ParameterError, PoleError

__all__ = [
    "gamma",
    "loggamma",
    "rgamma",
    "digamma",
    "elliptic_e",
    "hyp2f1",
    "ALPHA_MIN",
    "ALPHA_MAX",
    "check_alpha",
]

ALPHA_MIN = 0.05
ALPHA_MAX = 1.95

# Lanczos approximation, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_P = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

_SERIES_MAX_TERMS = 1_000_000
_NEAR_INTEGER = 1e-4
_EXACT_INTEGER = 1e-12
_TINY_PARAMETER = 1e-150


def _finite(name: str, x) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ParameterError(f"{name} must be finite, got {x!r}")
    return x


def check_alpha(alpha) -> float:
    """Validate the Riesz exponent against the supported window [0.05, 1.95]."""
    alpha = _finite("alpha", alpha)
    if not ALPHA_MIN <= alpha <= ALPHA_MAX:
        raise ParameterError(
            f"alpha={alpha!r} outside supported range [{ALPHA_MIN}, {ALPHA_MAX}]"
        )
    return alpha


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0.0 and x == math.floor(x)


def _lanczos_sum(x: float) -> float:
    # x already shifted by -1
    s = _LANCZOS_P[0]
    for i in range(1, len(_LANCZOS_P)):
        s += _LANCZOS_P[i] / (x + i)
    return s


def gamma(x) -> float:
    """Gamma function for real ``x``; raises PoleError at 0, -1, -2, ..."""
    x = _finite("x", x)
    if _is_nonpositive_integer(x):
        raise PoleError(f"gamma has a pole at x={x!r}")
    if x < 0.5:
        # reflection; sin(pi x) evaluated on a reduced argument
        return math.pi / (_sinpi(x) * gamma(1.0 - x))
    if x > 140.0:
        return math.exp(loggamma(x))
    x -= 1.0
    t = x + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (x + 0.5) * math.exp(-t) * _lanczos_sum(x)


def loggamma(x) -> float:
    """log|Gamma(x)|."""
    x = _finite("x", x)
    if _is_nonpositive_integer(x):
        raise PoleError(f"loggamma has a pole at x={x!r}")
    if x < 0.5:
        return math.log(math.pi / abs(_sinpi(x))) - loggamma(1.0 - x)
    x -= 1.0
    t = x + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (x + 0.5) * math.log(t) - t + math.log(_lanczos_sum(x))


def rgamma(x) -> float:
    """Reciprocal Gamma, entire: returns 0 at the poles of Gamma."""
    x = _finite("x", x)
    if _is_nonpositive_integer(x):
        return 0.0
    return 1.0 / gamma(x)


def _sinpi(x: float) -> float:
    r = math.fmod(x, 2.0)
    if r < 0.0:
        r += 2.0
    if r > 1.0:
        return -math.sin(math.pi * (r - 1.0))
    return math.sin(math.pi * r)


_BERNOULLI_OVER_2K = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)


def digamma(x) -> float:
    """psi(x) = Gamma'(x)/Gamma(x)."""
    x = _finite("x", x)
    if _is_nonpositive_integer(x):
        raise PoleError(f"digamma has a pole at x={x!r}")
    if x < 0.5:
        return digamma(1.0 - x) - math.pi * math.cos(math.pi * x) / _sinpi(x)
    acc = 0.0
    while x < 10.0:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    tail = 0.0
    p = inv2
    for c in _BERNOULLI_OVER_2K:
        tail += c * p
        p *= inv2
    return acc + math.log(x) - 0.5 / x - tail


def elliptic_e(p) -> float:
    """Complete elliptic integral of the second kind, parameter convention.

    Evaluated with the arithmetic-geometric mean; ``p`` must lie in [0, 1].
    """
    p = _finite("p", p)
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"elliptic_e parameter p={p!r} outside [0, 1]")
    if p == 1.0:
        return 1.0
    a = 1.0
    b = math.sqrt(1.0 - p)
    s = 0.5 * p
    w = 0.5
    c = math.sqrt(p)
    for _ in range(64):
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        # c_{n+1} = c_n^2 / (4 a_{n+1}) avoids the cancellation in (a - b) / 2
        c = c * c / (4.0 * a)
        w *= 2.0
        s += w * c * c
        if c < 1e-17 * a:
            break
    return math.pi / (2.0 * a) * (1.0 - s)


def _series(a: float, b: float, c: float, z: float) -> float:
    total = 1.0
    term = 1.0
    small = 0
    for n in range(_SERIES_MAX_TERMS):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
        total += term
        if term == 0.0:
            return total
        if abs(term) <= 1e-17 * abs(total):
            small += 1
            if small >= 3:
                return total
        else:
            small = 0
    raise ConvergenceError(
        "hypergeometric series did not converge",
        a=a, b=b, c=c, z=z, terms=_SERIES_MAX_TERMS, last_term=term, partial_sum=total,
    )


def _log_case_m0(a: float, b: float, z: float) -> float:
    # c = a + b
    w = 1.0 - z
    lw = math.log(w)
    pref = gamma(a + b) * rgamma(a) * rgamma(b)
    if pref == 0.0:
        return _series(a, b, a + b, z)
    psi1 = digamma(1.0)
    psia = digamma(a)
    psib = digamma(b)
    coef = 1.0
    total = 0.0
    small = 0
    for n in range(_SERIES_MAX_TERMS):
        term = coef * (2.0 * psi1 - psia - psib - lw)
        total += term
        if abs(term) <= 1e-17 * abs(total) and n > 2:
            small += 1
            if small >= 3:
                return pref * total
        else:
            small = 0
        coef *= (a + n) * (b + n) / ((n + 1.0) ** 2) * w
        psi1 += 1.0 / (n + 1.0)
        psia += 1.0 / (a + n)
        psib += 1.0 / (b + n)
    raise ConvergenceError("logarithmic 2F1 continuation did not converge", a=a, b=b, z=z)


def _log_case_m(a: float, b: float, m: int, z: float) -> float:
    # c = a + b + m with m >= 1
    c = a + b + m
    w = 1.0 - z
    lw = math.log(w)
    gc = gamma(c)

    finite = 0.0
    coef = 1.0
    for n in range(m):
        finite += coef
        if n + 1 < m:
            coef *= (a + n) * (b + n) / ((n + 1.0) * (1.0 - m + n)) * w
    finite *= gamma(m) * gc * rgamma(a + m) * rgamma(b + m)

    pref = gc * rgamma(a) * rgamma(b)
    if pref == 0.0:
        return finite
    psi1 = digamma(1.0)
    psim = digamma(m + 1.0)
    psia = digamma(a + m)
    psib = digamma(b + m)
    coef = 1.0 / math.factorial(m)
    total = 0.0
    small = 0
    for n in range(_SERIES_MAX_TERMS):
        term = coef * (lw - psi1 - psim + psia + psib)
        total += term
        if abs(term) <= 1e-17 * abs(total) and n > 2:
            small += 1
            if small >= 3:
                break
        else:
            small = 0
        coef *= (a + m + n) * (b + m + n) / ((n + 1.0) * (n + m + 1.0)) * w
        psi1 += 1.0 / (n + 1.0)
        psim += 1.0 / (n + m + 1.0)
        psia += 1.0 / (a + m + n)
        psib += 1.0 / (b + m + n)
    else:
        raise ConvergenceError("logarithmic 2F1 continuation did not converge", a=a, b=b, m=m, z=z)
    return finite - (-w) ** m * pref * total


def _unit_interval(a: float, b: float, c: float, z: float) -> float:
    """2F1 for z in (0, 1)."""
    if z <= 0.5 or _is_nonpositive_integer(a) or _is_nonpositive_integer(b):
        return _series(a, b, c, z)
    s = c - a - b
    k = round(s)
    gap = abs(s - k)
    if gap <= _EXACT_INTEGER:
        m = int(k)
        if m < 0:
            # Euler transformation maps c-a-b -> a+b-c > 0
            return (1.0 - z) ** m * _unit_interval(c - a, c - b, c, z)
        if m == 0:
            return _log_case_m0(a, b, z)
        return _log_case_m(a, b, m, z)
    if gap < _NEAR_INTEGER:
        # the linear transformation is ill-conditioned here
        return _series(a, b, c, z)
    w = 1.0 - z
    gc = gamma(c)
    t1 = gc * gamma(s) * rgamma(c - a) * rgamma(c - b)
    if t1 != 0.0:
        t1 *= _series(a, b, 1.0 - s, w)
    t2 = gc * gamma(-s) * rgamma(a) * rgamma(b)
    if t2 != 0.0:
        t2 *= w**s * _series(c - a, c - b, 1.0 + s, w)
    return t1 + t2


def hyp2f1(a, b, c, z) -> float:
    """Gauss hypergeometric function 2F1(a, b; c; z) for real arguments and z < 1.

    Direct series for |z| <= 1/2, the Pfaff transformation for z < 0, and the
    1 - z linear transformation (with its logarithmic forms when c - a - b is
    an integer) for 1/2 < z < 1.
    """
    a = _finite("a", a)
    b = _finite("b", b)
    c = _finite("c", c)
    z = _finite("z", z)
    if _is_nonpositive_integer(c):
        raise ParameterError(f"hyp2f1 undefined for c={c!r} (non-positive integer)")
    if z >= 1.0:
        raise ParameterError(f"hyp2f1 only supports z < 1, got z={z!r}")
    if z == 0.0 or min(abs(a), abs(b)) < _TINY_PARAMETER:
        # 2F1 - 1 is O(a b), far below one ulp; digamma(a) ~ -1/a would overflow
        return 1.0
    if _is_nonpositive_integer(a) or _is_nonpositive_integer(b):
        return _series(a, b, c, z)
    if z < 0.0:
        if z >= -0.5:
            # |z| <= 1/2: series converges geometrically already
            return _series(a, b, c, z)
        w = z / (z - 1.0)
        return (1.0 - z) ** (-a) * _unit_interval(a, c - b, c, w)
    return _unit_interval(a, b, c, z)
