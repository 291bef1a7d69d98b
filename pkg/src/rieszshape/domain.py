"""Planar domains (star-shaped graphs, ellipses, disk systems) and their geometric functionals."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.optimize import brentq, minimize_scalar

from . import specfun
from .boundary import TWO_PI, Arc, Segment, TrigCurve
from .errors import InvalidDomainError, OverlapError

__all__ = [
    "StarDomain",
    "EllipseDomain",
    "DiskSystem",
    "CutProfile",
    "Domain",
    "area",
    "perimeter",
    "curvature_at",
    "isoperimetric_deficit",
    "diameter",
    "barycenter",
    "dilate",
    "cut_profile",
    "boundary_pieces",
    "contains",
    "bounding_box",
    "chords",
    "star_cut_pieces",
    "boundary_csv",
    "grid_size",
]


def grid_size(n_modes: int) -> int:
    return max(256, 16 * n_modes)


def _point(p, name="center") -> tuple[float, float]:
    x, y = (float(v) for v in p)
    if not (math.isfinite(x) and math.isfinite(y)):
        raise InvalidDomainError(f"{name} must be finite, got {p!r}")
    return (x, y)


@dataclass(frozen=True, eq=False)
class StarDomain:
    """Region bounded by r(theta) = r0 (1 + rho(theta)) about ``center``.

    ``a`` holds a_0..a_N and ``b`` holds b_1..b_N of
    rho(theta) = a_0 + sum_k a_k cos(k theta) + b_k sin(k theta).
    """

    center: tuple[float, float]
    r0: float
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float).ravel()
        b = np.asarray(self.b, dtype=float).ravel()
        if len(b) == len(a):
            # accept a padded b_0 entry
            if b[0] != 0.0:
                raise InvalidDomainError("b_0 must be zero when b has N+1 entries")
            b = b[1:]
        if len(a) < 2 or len(b) != len(a) - 1:
            raise InvalidDomainError(
                f"need a_0..a_N and b_1..b_N with N >= 1, got {len(a)} and {len(b)} coefficients"
            )
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise InvalidDomainError("Fourier coefficients must be finite")
        r0 = float(self.r0)
        if not (math.isfinite(r0) and r0 > 0.0):
            raise InvalidDomainError(f"base radius must be positive, got {self.r0!r}")
        a.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "center", _point(self.center))
        object.__setattr__(self, "r0", r0)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        th = self.theta_grid()
        if np.min(1.0 + self.rho(th)) <= 0.0:
            raise InvalidDomainError("1 + rho(theta) must stay positive on the check grid")

    @property
    def n_modes(self) -> int:
        return len(self.a) - 1

    @property
    def grid_size(self) -> int:
        return grid_size(self.n_modes)

    def theta_grid(self, n: int | None = None) -> np.ndarray:
        n = self.grid_size if n is None else n
        return TWO_PI * np.arange(n) / n

    def _phase(self, theta):
        k = np.arange(1, self.n_modes + 1)
        kt = np.multiply.outer(np.asarray(theta, dtype=float), k)
        return k, np.cos(kt), np.sin(kt)

    def rho(self, theta) -> np.ndarray:
        _, c, s = self._phase(theta)
        return self.a[0] + c @ self.a[1:] + s @ self.b

    def radius(self, theta) -> np.ndarray:
        return self.r0 * (1.0 + self.rho(theta))

    def radius_derivs(self, theta) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        k, c, s = self._phase(theta)
        r = self.r0 * (1.0 + self.a[0] + c @ self.a[1:] + s @ self.b)
        r1 = self.r0 * ((s * -k) @ self.a[1:] + (c * k) @ self.b)
        r2 = self.r0 * ((c * -(k**2)) @ self.a[1:] + (s * -(k**2)) @ self.b)
        return r, r1, r2

    def boundary_points(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        r = self.radius(theta)
        return np.asarray(self.center) + np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)

    def curve(self) -> TrigCurve:
        rhat = np.zeros(self.n_modes + 1, dtype=complex)
        rhat[0] = self.r0 * (1.0 + self.a[0])
        rhat[1:] = 0.5 * self.r0 * (self.a[1:] - 1j * self.b)
        return TrigCurve.polar(self.center, rhat)

    def with_coefficients(self, r0: float | None = None, a=None, b=None, center=None) -> "StarDomain":
        return StarDomain(
            self.center if center is None else center,
            self.r0 if r0 is None else r0,
            self.a if a is None else a,
            self.b if b is None else b,
        )

    @classmethod
    def disk(cls, radius: float = 1.0, center=(0.0, 0.0), n_modes: int = 1) -> "StarDomain":
        return cls(center, radius, np.zeros(n_modes + 1), np.zeros(n_modes))

    @classmethod
    def from_radius_samples(cls, r: np.ndarray, n_modes: int, r0: float = 1.0, center=(0.0, 0.0)) -> "StarDomain":
        """Fit the first ``n_modes`` harmonics of uniformly sampled radii r(2 pi j / M)."""
        r = np.asarray(r, dtype=float)
        m = len(r)
        if m < 2 * n_modes + 1:
            raise InvalidDomainError(f"{m} samples cannot resolve {n_modes} modes")
        rh = np.fft.rfft(r / r0 - 1.0) / m
        a = np.empty(n_modes + 1)
        a[0] = rh[0].real
        a[1:] = 2.0 * rh[1 : n_modes + 1].real
        b = -2.0 * rh[1 : n_modes + 1].imag
        if 2 * n_modes == m:
            a[-1] *= 0.5
        return cls(center, r0, a, b)

    @classmethod
    def from_ellipse(cls, R: float, e: float, n_modes: int = 32, center=(0.0, 0.0)) -> "StarDomain":
        """Truncated polar Fourier series of the ellipse with area pi R^2 and eccentricity e."""
        ell = EllipseDomain(R, e)
        sa, sb = ell.semi_axes
        m = grid_size(n_modes)
        th = TWO_PI * np.arange(m) / m
        r = sa * sb / np.sqrt((sb * np.cos(th)) ** 2 + (sa * np.sin(th)) ** 2)
        return cls.from_radius_samples(r, n_modes, r0=R, center=center)

    def to_json(self) -> dict:
        return {
            "center": list(self.center),
            "r0": self.r0,
            "a": [float(v) for v in self.a],
            "b": [float(v) for v in self.b],
        }

    @classmethod
    def from_json(cls, data: Union[dict, str]) -> "StarDomain":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            return cls(data.get("center", (0.0, 0.0)), data["r0"], data["a"], data["b"])
        except KeyError as exc:
            raise InvalidDomainError(f"star domain JSON missing field {exc}") from None


@dataclass(frozen=True)
class EllipseDomain:
    """Ellipse of area pi R^2, eccentricity e, major axis along x."""

    R: float
    e: float
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        R, e = float(self.R), float(self.e)
        if not (math.isfinite(R) and R > 0.0):
            raise InvalidDomainError(f"effective radius must be positive, got {self.R!r}")
        if not (math.isfinite(e) and 0.0 <= e < 1.0):
            raise InvalidDomainError(f"eccentricity must lie in [0, 1), got {self.e!r}")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "e", e)
        object.__setattr__(self, "center", _point(self.center))

    @property
    def semi_axes(self) -> tuple[float, float]:
        q = (1.0 - self.e**2) ** 0.25
        return self.R / q, self.R * q

    def curve(self) -> TrigCurve:
        sa, sb = self.semi_axes
        return TrigCurve.ellipse(self.center, sa, sb)


@dataclass(frozen=True)
class DiskSystem:
    """Finite union of disks with pairwise disjoint closures; rows are (cx, cy, r)."""

    disks: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        rows = []
        for d in self.disks:
            cx, cy, r = (float(v) for v in d)
            if not all(math.isfinite(v) for v in (cx, cy, r)) or r <= 0.0:
                raise InvalidDomainError(f"invalid disk {d!r}")
            rows.append((cx, cy, r))
        if not rows:
            raise InvalidDomainError("a DiskSystem needs at least one disk")
        arr = np.array(rows)
        if len(rows) > 1:
            c = arr[:, :2]
            dist = np.linalg.norm(c[:, None, :] - c[None, :, :], axis=-1)
            rad = arr[:, 2][:, None] + arr[:, 2][None, :]
            iu = np.triu_indices(len(rows), 1)
            bad = dist[iu] <= rad[iu]
            if np.any(bad):
                i, j = iu[0][bad][0], iu[1][bad][0]
                raise OverlapError(f"disks {i} and {j} overlap or touch")
        object.__setattr__(self, "disks", tuple(rows))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.disks)

    @property
    def masses(self) -> np.ndarray:
        return math.pi * self.array[:, 2] ** 2

    def without(self, i: int) -> "DiskSystem":
        if not -len(self.disks) <= i < len(self.disks):
            raise IndexError(f"disk index {i} out of range for {len(self.disks)} disks")
        rest = list(self.disks)
        del rest[i]
        return DiskSystem(tuple(rest))

    @classmethod
    def single(cls, radius: float = 1.0, center=(0.0, 0.0)) -> "DiskSystem":
        return cls(((center[0], center[1], radius),))


Domain = Union[StarDomain, EllipseDomain, DiskSystem]


@dataclass(frozen=True, eq=False)
class CutProfile:
    """Slices of a domain by lines perpendicular to ``direction``.

    ``s`` is the offset from the supporting line at the low end; ``A`` the
    chord length and ``V`` the cumulative area on the low side.
    """

    direction: np.ndarray
    origin: float
    s: np.ndarray
    A: np.ndarray
    V: np.ndarray
    d: float
    total_area: float = field(default=float("nan"))


def _check(dom) -> None:
    if not isinstance(dom, (StarDomain, EllipseDomain, DiskSystem)):
        raise InvalidDomainError(f"unsupported domain type {type(dom).__name__}")


def area(dom: Domain) -> float:
    _check(dom)
    if isinstance(dom, StarDomain):
        th = dom.theta_grid()
        return float(0.5 * np.mean(dom.radius(th) ** 2) * TWO_PI)
    if isinstance(dom, EllipseDomain):
        return math.pi * dom.R**2
    return float(np.sum(dom.masses))


def perimeter(dom: Domain) -> float:
    _check(dom)
    if isinstance(dom, StarDomain):
        th = dom.theta_grid()
        r, r1, _ = dom.radius_derivs(th)
        return float(np.mean(np.hypot(r, r1)) * TWO_PI)
    if isinstance(dom, EllipseDomain):
        return 4.0 * dom.R * (1.0 - dom.e**2) ** -0.25 * specfun.elliptic_e(dom.e**2)
    return float(TWO_PI * np.sum(dom.array[:, 2]))


def curvature_at(dom: StarDomain, theta) -> np.ndarray:
    """Signed curvature (positive for convex parts) of the polar graph at angle ``theta``."""
    r, r1, r2 = dom.radius_derivs(theta)
    if np.any(r <= 0.0):
        raise InvalidDomainError("curvature requested where the radius degenerates")
    return (r * r + 2.0 * r1 * r1 - r * r2) / (r * r + r1 * r1) ** 1.5


def isoperimetric_deficit(dom: Domain) -> float:
    """|dOmega|/(2 pi) - 1 after rescaling the domain to area pi."""
    m = area(dom)
    if m <= 0.0:
        raise InvalidDomainError("deficit needs positive area")
    return perimeter(dom) * math.sqrt(math.pi / m) / TWO_PI - 1.0


def _max_pair_distance(p: np.ndarray) -> float:
    best = 0.0
    for i in range(0, len(p), 512):
        d = np.linalg.norm(p[i : i + 512, None, :] - p[None, :, :], axis=-1)
        best = max(best, float(d.max()))
    return best


def diameter(dom: Domain) -> float:
    _check(dom)
    if isinstance(dom, StarDomain):
        return _max_pair_distance(dom.boundary_points(dom.theta_grid()))
    if isinstance(dom, EllipseDomain):
        return 2.0 * dom.semi_axes[0]
    arr = dom.array
    c, r = arr[:, :2], arr[:, 2]
    d = np.linalg.norm(c[:, None, :] - c[None, :, :], axis=-1) + r[:, None] + r[None, :]
    return float(d.max())


def barycenter(dom: Domain) -> tuple[float, float]:
    _check(dom)
    if isinstance(dom, StarDomain):
        th = dom.theta_grid()
        r3 = dom.radius(th) ** 3 / 3.0
        mx = np.mean(r3 * np.cos(th)) * TWO_PI
        my = np.mean(r3 * np.sin(th)) * TWO_PI
        m = area(dom)
        return (dom.center[0] + mx / m, dom.center[1] + my / m)
    if isinstance(dom, EllipseDomain):
        return dom.center
    arr = dom.array
    w = arr[:, 2] ** 2
    return (float(w @ arr[:, 0] / w.sum()), float(w @ arr[:, 1] / w.sum()))


def dilate(dom: Domain, lam: float) -> Domain:
    """Scale every length by ``lam`` about the origin."""
    _check(dom)
    lam = float(lam)
    if not (math.isfinite(lam) and lam > 0.0):
        raise InvalidDomainError(f"dilation factor must be positive, got {lam!r}")
    if lam == 1.0:
        return dom
    if isinstance(dom, StarDomain):
        c = dom.center
        return StarDomain((lam * c[0], lam * c[1]), lam * dom.r0, dom.a, dom.b)
    if isinstance(dom, EllipseDomain):
        return EllipseDomain(lam * dom.R, dom.e, (lam * dom.center[0], lam * dom.center[1]))
    return DiskSystem(tuple((lam * x, lam * y, lam * r) for x, y, r in dom.disks))


def boundary_pieces(dom: Domain) -> list[Arc]:
    """Closed CCW boundary curves of the domain as quadrature pieces."""
    _check(dom)
    if isinstance(dom, DiskSystem):
        return [Arc.closed(TrigCurve.circle((x, y), r)) for x, y, r in dom.disks]
    return [Arc.closed(dom.curve())]


def contains(dom: Domain, pts: np.ndarray) -> np.ndarray:
    """Indicator of the (open) domain at the rows of ``pts``."""
    _check(dom)
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if isinstance(dom, StarDomain):
        d = pts - np.asarray(dom.center)
        th = np.arctan2(d[:, 1], d[:, 0])
        return np.hypot(d[:, 0], d[:, 1]) < dom.radius(th)
    if isinstance(dom, EllipseDomain):
        sa, sb = dom.semi_axes
        d = pts - np.asarray(dom.center)
        return (d[:, 0] / sa) ** 2 + (d[:, 1] / sb) ** 2 < 1.0
    inside = np.zeros(len(pts), dtype=bool)
    for x, y, r in dom.disks:
        inside |= (pts[:, 0] - x) ** 2 + (pts[:, 1] - y) ** 2 < r * r
    return inside


def bounding_box(dom: Domain) -> tuple[float, float, float, float]:
    """(xmin, xmax, ymin, ymax) enclosing the domain."""
    _check(dom)
    if isinstance(dom, StarDomain):
        p = dom.boundary_points(dom.theta_grid(4 * dom.grid_size))
        pad = 1e-3 * (p.max() - p.min())
        return (p[:, 0].min() - pad, p[:, 0].max() + pad, p[:, 1].min() - pad, p[:, 1].max() + pad)
    if isinstance(dom, EllipseDomain):
        sa, sb = dom.semi_axes
        cx, cy = dom.center
        return (cx - sa, cx + sa, cy - sb, cy + sb)
    arr = dom.array
    return (
        float((arr[:, 0] - arr[:, 2]).min()),
        float((arr[:, 0] + arr[:, 2]).max()),
        float((arr[:, 1] - arr[:, 2]).min()),
        float((arr[:, 1] + arr[:, 2]).max()),
    )


# ----------------------------------------------------------------------------
# line cuts


def _crossings(dom: StarDomain, u: np.ndarray, level: float, grid: np.ndarray, proj: np.ndarray) -> list[float]:
    """Parameters where the boundary meets the line {x . u = level}.

    Sign changes on the grid are refined by Brent's method; grid-level local
    extrema are refined too so that near-tangent crossings inside a single
    cell are not lost.
    """
    def g(t):
        return float(dom.boundary_points(t) @ u) - level

    def root(a, b):
        ga, gb = g(a), g(b)
        if ga * gb > 0.0:
            # grid and pointwise evaluation disagree in the last bit
            return a if abs(ga) < abs(gb) else b
        return brentq(g, a, b, xtol=1e-15, rtol=1e-15)

    f = proj - level
    n = len(grid)
    h = TWO_PI / n
    roots = []
    for j in range(n):
        f0, f1 = f[j], f[(j + 1) % n]
        t0 = grid[j]
        if f0 == 0.0:
            roots.append(t0)
        elif f0 * f1 < 0.0:
            roots.append(root(t0, t0 + h))
    for j in range(n):
        fl, fc, fr = f[j - 1], f[j], f[(j + 1) % n]
        if fc == 0.0:
            continue
        sign = 1.0 if fc > 0.0 else -1.0
        # local extremum pointing toward the level line
        if sign * fc <= sign * fl and sign * fc <= sign * fr:
            t0, t1 = grid[j] - h, grid[j] + h
            res = minimize_scalar(lambda t: sign * g(t), bounds=(t0, t1), method="bounded", options={"xatol": 1e-14})
            if res.fun < 0.0:
                te = float(res.x)
                roots.append(root(t0, te))
                roots.append(root(te, t1))
    return sorted(float(np.mod(r, TWO_PI)) for r in roots)


def chords(dom: StarDomain, u, level: float, n_grid: int | None = None) -> list[tuple[np.ndarray, np.ndarray]]:
    """Segments of the line {x . u = level} lying inside the domain, ordered along rot(u)."""
    u = np.asarray(u, dtype=float)
    grid = dom.theta_grid(n_grid or 4 * dom.grid_size)
    proj = dom.boundary_points(grid) @ u
    roots = _crossings(dom, u, level, grid, proj)
    if len(roots) < 2:
        return []
    pts = dom.boundary_points(np.array(roots))
    v = np.array([-u[1], u[0]])
    order = np.argsort(pts @ v)
    pts = pts[order]
    return [(pts[i], pts[i + 1]) for i in range(0, len(pts) - 1, 2)]


def cut_profile(dom: StarDomain, direction=(1.0, 0.0), n_s: int = 201) -> CutProfile:
    """Chord lengths A(s) and swept areas V(s) across the domain along ``direction``.

    Offsets are Chebyshev-Lobatto spaced so that the square-root behaviour of
    A at the two supporting lines is resolved; V is the cumulative Simpson
    integral of A in the angle variable of that spacing.
    """
    if not isinstance(dom, StarDomain):
        raise InvalidDomainError("cut_profile needs a StarDomain")
    u = np.asarray(direction, dtype=float)
    nu = np.linalg.norm(u)
    if not (np.isfinite(nu) and nu > 0):
        raise InvalidDomainError("direction must be a nonzero vector")
    u = u / nu
    if n_s < 5:
        raise InvalidDomainError("n_s must be at least 5")
    if n_s % 2 == 0:
        n_s += 1
    grid = dom.theta_grid(4 * dom.grid_size)
    proj = dom.boundary_points(grid) @ u
    lo, hi = _support(dom, u, grid, proj)
    width = hi - lo
    phi = np.linspace(0.0, math.pi, n_s)
    s = 0.5 * width * (1.0 - np.cos(phi))
    A = np.zeros(n_s)
    for i in range(1, n_s - 1):
        A[i] = sum(float(np.linalg.norm(q - p)) for p, q in chords(dom, u, lo + s[i]))
    integrand = A * 0.5 * width * np.sin(phi)
    V = np.concatenate([[0.0], cumulative_simpson(integrand, x=phi)])
    return CutProfile(u, lo, s, A, V, width, area(dom))


def _support(dom: StarDomain, u, grid, proj) -> tuple[float, float]:
    def refine(j, sign):
        t0, t1 = grid[j] - TWO_PI / len(grid), grid[j] + TWO_PI / len(grid)
        res = minimize_scalar(
            lambda t: sign * float(dom.boundary_points(t) @ u), bounds=(t0, t1), method="bounded",
            options={"xatol": 1e-13},
        )
        return sign * res.fun

    return refine(int(np.argmin(proj)), 1.0), refine(int(np.argmax(proj)), -1.0)


def boundary_csv(dom: StarDomain, n: int | None = None) -> str:
    """Boundary samples as CSV rows ``theta,r,x,y`` with 17 significant digits."""
    th = dom.theta_grid(n)
    r = dom.radius(th)
    p = dom.boundary_points(th)
    lines = ["theta,r,x,y"]
    for t, rr, (x, y) in zip(th, r, p):
        lines.append(f"{t:.17g},{rr:.17g},{x:.17g},{y:.17g}")
    return "\n".join(lines) + "\n"


def star_cut_pieces(dom: StarDomain, u, level: float):
    """Boundary pieces of the two parts {x.u < level} and {x.u > level} of the domain.

    Returns (low_pieces, high_pieces); chords appear in both with opposite orientation.
    """
    u = np.asarray(u, dtype=float)
    grid = dom.theta_grid(4 * dom.grid_size)
    proj = dom.boundary_points(grid) @ u
    roots = sorted(_crossings(dom, u, level, grid, proj))
    curve = dom.curve()
    if len(roots) < 2:
        raise InvalidDomainError("cut line misses the domain")
    low, high = [], []
    for i, t0 in enumerate(roots):
        t1 = roots[i + 1] if i + 1 < len(roots) else roots[0] + TWO_PI
        mid = 0.5 * (t0 + t1)
        arc = Arc(curve, t0, t1, False)
        (low if float(dom.boundary_points(mid) @ u) < level else high).append(arc)
    for p, q in chords(dom, u, level):
        # low part: outward normal +u, CCW tangent (-u_y, u_x); chords run p -> q along it
        low.append(Segment(p, q))
        high.append(Segment(q, p))
    return low, high
