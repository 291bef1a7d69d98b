"""Boundary-integral quadrature for the Riesz self-interaction.

For a region whose boundary consists of CCW pieces gamma_P, the divergence
theorem applied twice gives

    int_Omega int_Omega |x-y|^(-alpha) dx dy
        = -(2-alpha)^(-2) sum_{P,Q} int_P int_Q |gamma_P(s) - gamma_Q(t)|^(2-alpha)
                                     gamma_P'(s) . gamma_Q'(t) ds dt,

and once gives the potential

    v(x) = (2-alpha)^(-1) sum_Q int_Q |gamma_Q(t) - x|^(-alpha)
                                (gamma_Q(t) - x) . nu_Q(t) dt,

with nu the outward normal scaled by the speed.  Both kernels are integrable
for alpha < 2.  Inner integrals use Gauss-Legendre panels graded
geometrically toward the (near-)singular parameter; outer integrals over
closed curves use the periodic trapezoid rule, which is spectrally accurate
because the inner integral is a smooth periodic function of the outer node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .boundary import TWO_PI, Arc, Piece, closest_parameter, normal_times_speed

GL_ORDER = 12
GRADING = 0.25
_CHUNK = 400_000


@lru_cache(maxsize=None)
def _gauss(q: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(q)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=256)
def graded_template(split: float, levels: int, n_mid: int, q: int = GL_ORDER):
    """Composite rule on [0, 1] refined geometrically toward both endpoints.

    Panels [split*g^(j+1), split*g^j] for j < levels cover the neighbourhood of
    each end; ``n_mid`` uniform panels cover [split, 1 - split].
    """
    split = min(split, 0.25)
    left = [0.0] + [split * GRADING**j for j in range(levels, 0, -1)] + [split]
    mid = list(np.linspace(split, 1.0 - split, n_mid + 1)[1:-1])
    right = [1.0 - b for b in reversed(left)]
    breaks = np.array(left + mid + right)
    x, w = _gauss(q)
    widths = np.diff(breaks)
    nodes = (breaks[:-1, None] + widths[:, None] * x[None, :]).ravel()
    weights = (widths[:, None] * w[None, :]).ravel()
    return nodes, weights


def singular_levels(alpha: float, split: float, floor: float = 0.0) -> int:
    """Number of geometric levels so the innermost panel's contribution is negligible.

    The integrands vanish like |tau|^(2-alpha) at the singular point; ``floor``
    is an extra scale (relative distance to the curve) the grading must reach.
    All arguments are fractions of the parameter interval.
    """
    beta = 2.0 - alpha
    target = 1e-12 ** (1.0 / (1.0 + beta))
    if floor > 0.0:
        target = min(target, 0.5 * floor)
    if target >= split:
        return 1
    return int(math.ceil(math.log(target / split) / math.log(GRADING))) + 1


@dataclass(frozen=True)
class RuleSpec:
    """Resolution knobs handed down from QuadratureConfig."""

    outer: int = 256
    split: float = TWO_PI / 32.0
    mid_panels: int = 32


def _mid_panels(piece: Piece, spec: RuleSpec) -> int:
    if isinstance(piece, Arc):
        frac = (piece.hi - piece.lo) / TWO_PI
        return max(4, int(math.ceil(frac * max(spec.mid_panels, piece.curve.n_modes // 2 + 1))))
    return 4


def _split_fraction(piece: Piece, spec: RuleSpec) -> float:
    span = piece.hi - piece.lo
    if isinstance(piece, Arc):
        return spec.split / span
    return 1.0 / 16.0


def outer_rule(piece: Piece, spec: RuleSpec, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    if piece.periodic:
        n = spec.outer
        return piece.lo + (piece.hi - piece.lo) * np.arange(n) / n, np.full(n, (piece.hi - piece.lo) / n)
    split = _split_fraction(piece, spec)
    u, w = graded_template(split, singular_levels(alpha, split), _mid_panels(piece, spec))
    span = piece.hi - piece.lo
    return piece.lo + span * u, span * w


def inner_rule(piece: Piece, centers: np.ndarray, spec: RuleSpec, alpha: float, floor: float = 0.0):
    """Nodes/weights on ``piece`` graded toward ``centers`` (one row per center).

    ``floor`` is the smallest feature size to resolve, in parameter units.
    """
    span = piece.hi - piece.lo
    split = _split_fraction(piece, spec)
    levels = singular_levels(alpha, split, floor / span)
    u, w = graded_template(split, levels, _mid_panels(piece, spec))
    c = centers[:, None]
    if piece.periodic:
        return c + span * u[None, :], np.broadcast_to(span * w, (len(centers), len(w)))
    left = c - piece.lo
    right = piece.hi - c
    t = np.concatenate([piece.lo + left * u[None, :], c + right * u[None, :]], axis=1)
    wt = np.concatenate([left * w[None, :], right * w[None, :]], axis=1)
    return t, wt


def _param_floor(piece: Piece, tstar: np.ndarray, dist: np.ndarray) -> np.ndarray:
    """Distance to the curve expressed in parameter units of ``piece``, per row."""
    speed = np.linalg.norm(piece.deriv(tstar), axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(speed > 0, dist / speed, 0.0)


def grouped_inner_rules(piece: Piece, tstar: np.ndarray, dist: np.ndarray, spec: RuleSpec, alpha: float):
    """Yield (row indices, nodes, weights), grouping rows that need the same grading depth."""
    span = piece.hi - piece.lo
    split = _split_fraction(piece, spec)
    floor = _param_floor(piece, tstar, dist) / span
    # rows lying on the piece are treated as singular at their foot point
    floor[floor < 1e-14] = 0.0
    levels = np.array([singular_levels(alpha, split, f) for f in floor])
    for lev in np.unique(levels):
        rows = np.nonzero(levels == lev)[0]
        # the representative floor reproduces exactly this number of levels
        f = float(np.min(floor[rows])) if lev > singular_levels(alpha, split) else 0.0
        t, wt = inner_rule(piece, tstar[rows], spec, alpha, floor=f * span)
        yield rows, t, wt


def _chunks(n_rows: int, row_size: int):
    step = max(1, _CHUNK // max(1, row_size))
    for i in range(0, n_rows, step):
        yield slice(i, min(n_rows, i + step))


def _pow_remainder(q: np.ndarray, p: float) -> np.ndarray:
    """(1+q)^p - 1 - p q, accurate for small q."""
    out = np.empty_like(q)
    small = np.abs(q) < 0.25
    qs = q[small]
    term = p * (p - 1.0) / 2.0 * qs * qs
    acc = term.copy()
    for n in range(3, 40):
        term = term * (p - n + 1.0) / n * qs
        acc += term
    out[small] = acc
    ql = q[~small]
    out[~small] = (1.0 + ql) ** p - 1.0 - p * ql
    return out


def _far_pair(P: Arc, Q: Arc, beta: float, spec: RuleSpec) -> float:
    """Pair integral for well-separated closed curves.

    Constant and linear Taylor terms of |d + h|^beta about the centre offset d
    integrate to zero against closed-curve tangents and are removed to avoid
    cancellation.
    """
    n = spec.outer
    t = TWO_PI * np.arange(n) / n
    u = P.points(t) - P.curve.center
    w = Q.points(t) - Q.curve.center
    dp = P.deriv(t)
    dq = Q.deriv(t)
    d = P.curve.center - Q.curve.center
    d2 = float(d @ d)
    h = u[:, None, :] - w[None, :, :]
    q = (2.0 * (h @ d) + np.sum(h * h, axis=-1)) / d2
    p = 0.5 * beta
    ker = d2**p * (_pow_remainder(q, p) + p * np.sum(h * h, axis=-1) / d2)
    val = np.einsum("ij,ik,jk->", ker, dp, dq)
    return float(val) * (TWO_PI / n) ** 2


def pair_integral(P: Piece, Q: Piece, alpha: float, spec: RuleSpec, same: bool) -> tuple[float, float]:
    """int_P int_Q |gamma_P - gamma_Q|^(2-alpha) gamma_P' . gamma_Q' and a nested-rule error estimate."""
    beta = 2.0 - alpha
    if (
        not same
        and isinstance(P, Arc) and isinstance(Q, Arc)
        and P.periodic and Q.periodic
    ):
        sep = np.linalg.norm(P.curve.center - Q.curve.center)
        if sep > 3.0 * (P.curve.extent + Q.curve.extent):
            return _far_pair(P, Q, beta, spec), 0.0

    s, ws = outer_rule(P, spec, alpha)
    xs = P.points(s)
    dps = P.deriv(s)
    inner = np.empty(len(s))
    if same:
        t, wt = inner_rule(Q, s, spec, alpha)
        groups = [(np.arange(len(s)), t, wt)]
    else:
        tstar, dist = closest_parameter(Q, xs)
        groups = grouped_inner_rules(Q, tstar, dist, spec, alpha)
    for rows, t, wt in groups:
        for sl in _chunks(len(rows), t.shape[1]):
            r = rows[sl]
            tt = t[sl]
            if same:
                delta = P.diff(tt, s[r, None])
            else:
                delta = Q.points(tt) - xs[r, None, :]
            r2 = np.sum(delta * delta, axis=-1)
            ker = r2 ** (0.5 * beta)
            dq = Q.deriv(tt)
            dot = np.sum(dq * dps[r, None, :], axis=-1)
            inner[r] = np.sum(ker * dot * wt[sl], axis=1)
    total = float(np.dot(inner, ws))
    err = 0.0
    if P.periodic and len(s) % 2 == 0:
        coarse = float(np.dot(inner[::2], 2.0 * ws[::2]))
        err = abs(total - coarse)
    return total, err


def nonlocal_from_pieces(pieces_x, pieces_y, alpha: float, spec: RuleSpec) -> tuple[float, float]:
    """Ordered-pair interaction int_X int_Y |x-y|^-alpha between regions bounded by the given pieces."""
    total = 0.0
    err = 0.0
    for P in pieces_x:
        for Q in pieces_y:
            val, e = pair_integral(P, Q, alpha, spec, same=P is Q)
            total += val
            err += e
    scale = -1.0 / (2.0 - alpha) ** 2
    return scale * total, abs(scale) * err


def _potential_rows(Q: Piece, x, t, wt, alpha: float, centers=None) -> np.ndarray:
    out = np.empty(len(x))
    for sl in _chunks(len(x), t.shape[1]):
        tt = t[sl]
        if centers is not None:
            delta = Q.diff(tt, centers[sl, None])
        else:
            delta = Q.points(tt) - x[sl, None, :]
        nu = normal_times_speed(Q, tt)
        r2 = np.sum(delta * delta, axis=-1)
        dot = np.sum(delta * nu, axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            f = np.where(r2 > 0.0, r2 ** (-0.5 * alpha) * dot, 0.0)
        out[sl] = np.sum(f * wt[sl], axis=1)
    return out


def potential_from_pieces(
    pieces, alpha: float, x: np.ndarray, spec: RuleSpec,
    on_piece: Piece | None = None, on_param: np.ndarray | None = None,
) -> np.ndarray:
    """v(x) for each row of ``x``.

    When ``on_piece``/``on_param`` are given the points lie on that piece at
    those parameters and the singular contribution uses exact differences.
    Points found (numerically) on any other piece get the same treatment.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    out = np.zeros(len(x))
    scale = max(1.0, float(np.max(np.abs(x))))
    for Q in pieces:
        if Q is on_piece:
            centers = np.asarray(on_param, dtype=float)
            t, wt = inner_rule(Q, centers, spec, alpha)
            out += _potential_rows(Q, x, t, wt, alpha, centers)
            continue
        tstar, dist = closest_parameter(Q, x)
        on = dist < 1e-13 * scale
        if np.any(on):
            t, wt = inner_rule(Q, tstar[on], spec, alpha)
            out[on] += _potential_rows(Q, x[on], t, wt, alpha, tstar[on])
        off = np.nonzero(~on)[0]
        if len(off):
            for rows, t, wt in grouped_inner_rules(Q, tstar[off], dist[off], spec, alpha):
                idx = off[rows]
                out[idx] += _potential_rows(Q, x[idx], t, wt, alpha)
    return out / (2.0 - alpha)
