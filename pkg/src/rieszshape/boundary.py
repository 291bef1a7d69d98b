"""Parametric boundary pieces consumed by the boundary-integral quadrature.

Every closed boundary handled by the package (star-shaped graphs, ellipses,
circles) is a vector trigonometric polynomial

    gamma(t) = c + sum_k A_k cos(k t) + B_k sin(k t),    t in [0, 2 pi),

oriented counter-clockwise.  Differences gamma(t) - gamma(s) are evaluated
with sum-to-product identities so that they keep full relative accuracy as
t -> s; the singular potential quadrature depends on that.

Cut domains additionally use straight :class:`Segment` pieces and
:class:`TrigCurve` arcs restricted to a parameter sub-interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


def _rot(v: np.ndarray) -> np.ndarray:
    """Rotate tangent vectors by -90 degrees: outward normal times speed for a CCW curve."""
    return np.stack([v[..., 1], -v[..., 0]], axis=-1)


class TrigCurve:
    """Closed curve given by vector Fourier coefficients for modes k = 1..K."""

    def __init__(self, center, cos_coef, sin_coef):
        self.center = np.asarray(center, dtype=float).reshape(2)
        self.cos_coef = np.atleast_2d(np.asarray(cos_coef, dtype=float))
        self.sin_coef = np.atleast_2d(np.asarray(sin_coef, dtype=float))
        if self.cos_coef.shape != self.sin_coef.shape or self.cos_coef.shape[1] != 2:
            raise ValueError("coefficient arrays must both have shape (K, 2)")
        self.k = np.arange(1, self.cos_coef.shape[0] + 1, dtype=float)

    @property
    def n_modes(self) -> int:
        return self.cos_coef.shape[0]

    @property
    def extent(self) -> float:
        """Upper bound on |gamma(t) - center|."""
        return float(
            np.sum(np.hypot(*self.cos_coef.T)) + np.sum(np.hypot(*self.sin_coef.T))
        )

    @classmethod
    def circle(cls, center, radius: float) -> "TrigCurve":
        return cls(center, [[radius, 0.0]], [[0.0, radius]])

    @classmethod
    def ellipse(cls, center, a: float, b: float) -> "TrigCurve":
        return cls(center, [[a, 0.0]], [[0.0, b]])

    @classmethod
    def polar(cls, center, radius_hat: np.ndarray) -> "TrigCurve":
        """Curve c + r(t)(cos t, sin t) from the complex Fourier coefficients of r.

        ``radius_hat[j]`` is the coefficient of exp(i j t) for j = 0..N
        (negative modes are the conjugates).
        """
        n = len(radius_hat) - 1
        # z(t) = sum_j rhat_j exp(i (j+1) t), j = -N..N
        full = np.concatenate([np.conj(radius_hat[:0:-1]), radius_hat])
        zhat = {j + 1: full[j + n] for j in range(-n, n + 1)}
        kmax = n + 1
        cos_c = np.zeros((kmax, 2))
        sin_c = np.zeros((kmax, 2))
        for m in range(1, kmax + 1):
            zp = zhat.get(m, 0.0)
            zm = zhat.get(-m, 0.0)
            cm = zp + zm
            sm = 1j * (zp - zm)
            cos_c[m - 1] = (cm.real, cm.imag)
            sin_c[m - 1] = (sm.real, sm.imag)
        # the mode-0 term of z is a translation
        z0 = zhat.get(0, 0.0)
        c = np.asarray(center, dtype=float) + np.array([np.real(z0), np.imag(z0)])
        return cls(c, cos_c, sin_c)

    def _harmonics(self, x):
        """Yield (k-1, cos(k x), sin(k x)) for k = 1..K by angle addition."""
        c1 = np.cos(x)
        s1 = np.sin(x)
        ck, sk = c1, s1
        for j in range(self.n_modes):
            yield j, ck, sk
            if j + 1 < self.n_modes:
                ck, sk = ck * c1 - sk * s1, sk * c1 + ck * s1

    def _combine(self, pairs, shape) -> np.ndarray:
        out = np.zeros(shape + (2,))
        for j, cf, sf in pairs:
            A = self.cos_coef[j]
            B = self.sin_coef[j]
            out[..., 0] += cf * A[0] + sf * B[0]
            out[..., 1] += cf * A[1] + sf * B[1]
        return out

    def points(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self.center + self._combine(self._harmonics(t), t.shape)

    def deriv(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        k = self.k
        return self._combine(((j, -k[j] * s, k[j] * c) for j, c, s in self._harmonics(t)), t.shape)

    def deriv2(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        k2 = self.k**2
        return self._combine(((j, -k2[j] * c, -k2[j] * s) for j, c, s in self._harmonics(t)), t.shape)

    def diff(self, t, s) -> np.ndarray:
        """gamma(t) - gamma(s) without cancellation for t close to s."""
        t, s = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
        half = self._harmonics(0.5 * (t - s))
        mid = self._harmonics(0.5 * (t + s))
        # 2 sin(k h) [-sin(k m) A_k + cos(k m) B_k]
        pairs = ((j, -2.0 * sh * sm, 2.0 * sh * cm) for (j, _, sh), (_, cm, sm) in zip(half, mid))
        return self._combine(pairs, t.shape)

    def scaled(self, lam: float) -> "TrigCurve":
        return TrigCurve(lam * self.center, lam * self.cos_coef, lam * self.sin_coef)


@dataclass(frozen=True, eq=False)
class Arc:
    """A TrigCurve restricted to [lo, hi]; the whole closed curve when periodic."""

    curve: TrigCurve
    lo: float = 0.0
    hi: float = TWO_PI
    periodic: bool = True

    @classmethod
    def closed(cls, curve: TrigCurve) -> "Arc":
        return cls(curve, 0.0, TWO_PI, True)

    def points(self, t):
        return self.curve.points(t)

    def deriv(self, t):
        return self.curve.deriv(t)

    def diff(self, t, s):
        return self.curve.diff(t, s)

    @property
    def coarse_count(self) -> int:
        return max(128, 8 * self.curve.n_modes)


@dataclass(frozen=True, eq=False)
class Segment:
    """Straight piece p -> q parametrized on [0, 1]."""

    p: np.ndarray
    q: np.ndarray
    lo: float = 0.0
    hi: float = 1.0
    periodic: bool = False

    def __post_init__(self):
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float))
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float))

    def points(self, t):
        t = np.asarray(t, dtype=float)[..., None]
        return self.p + t * (self.q - self.p)

    def deriv(self, t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(self.q - self.p, t.shape + (2,))

    def diff(self, t, s):
        d = np.asarray(t, dtype=float) - np.asarray(s, dtype=float)
        return d[..., None] * (self.q - self.p)

    @property
    def coarse_count(self) -> int:
        return 2


Piece = Arc | Segment


def closest_parameter(piece: Piece, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Parameter of the point of ``piece`` nearest to each row of ``x`` and that distance."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if isinstance(piece, Segment):
        d = piece.q - piece.p
        t = np.clip(((x - piece.p) @ d) / float(d @ d), 0.0, 1.0)
        return t, np.linalg.norm(piece.points(t) - x, axis=-1)

    n = piece.coarse_count
    grid = np.linspace(piece.lo, piece.hi, n, endpoint=not piece.periodic)
    pts = piece.points(grid)
    d2 = np.sum((x[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
    t = grid[np.argmin(d2, axis=1)]
    span = piece.hi - piece.lo
    for _ in range(8):
        g = piece.points(t) - x
        g1 = piece.deriv(t)
        g2 = piece.curve.deriv2(t)
        f1 = np.sum(g * g1, axis=-1)
        f2 = np.sum(g1 * g1, axis=-1) + np.sum(g * g2, axis=-1)
        step = np.where(f2 > 0, f1 / np.where(f2 > 0, f2, 1.0), 0.0)
        step = np.clip(step, -span / n, span / n)
        t = t - step
        if not piece.periodic:
            t = np.clip(t, piece.lo, piece.hi)
        if np.all(np.abs(step) < 1e-15 * max(1.0, span)):
            break
    if piece.periodic:
        t = np.mod(t - piece.lo, span) + piece.lo
    return t, np.linalg.norm(piece.points(t) - x, axis=-1)


def normal_times_speed(piece: Piece, t) -> np.ndarray:
    """Outward normal scaled by |gamma'(t)| (so n dl = this * dt)."""
    return _rot(piece.deriv(t))
