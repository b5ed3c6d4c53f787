"""Ball quadrature on the periodic grid and parabolic-ball time slabs.

Spatial integrals over ``B(x0, r)`` use the midpoint value of each grid cell
weighted by the exact volume of ``cell ∩ ball``.  Constant integrands are
therefore integrated exactly, ``sum(weights) = 4/3 pi r^3`` to roundoff.

The ball lives on the torus: a point belongs to it when its minimum-image
displacement from ``x0`` (components in ``[-L/2, L/2)``) has norm below
``r``.  Cells cut by the wrap-around plane are split into their pieces.

Cell-ball volumes reduce to a 1-D integral of a closed-form disk-rectangle
area, evaluated with tanh-sinh quadrature between the points where that area
changes form.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grid import GridSpec, fwd, inv

FLAVOR_Q = "Q"  # backward cylinder ]t0 - r^2, t0[ x B
FLAVOR_QQ = "QQ"  # centered cylinder ]t0 - r^2, t0 + r^2[ x B


# ---------------------------------------------------------------------------
# disk-rectangle areas


def _prim(y, s, rho2):
    # antiderivative of sqrt(rho^2 - y^2)
    with np.errstate(invalid="ignore", divide="ignore"):
        arg = np.where(rho2 > 0, y / np.sqrt(np.where(rho2 > 0, rho2, 1.0)), 0.0)
    return 0.5 * (y * s + rho2 * np.arcsin(np.clip(arg, -1.0, 1.0)))


def disk_corner_area(Y, Z, rho):
    """Area of ``{y^2 + z^2 < rho^2, y < Y, z < Z}``, elementwise."""
    Y, Z, rho = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (Y, Z, rho)))
    rho2 = rho * rho
    s_of = lambda y: np.sqrt(np.maximum(rho2 - y * y, 0.0))  # noqa: E731
    ym = np.clip(Y, -rho, rho)
    p_lo = -0.25 * np.pi * rho2
    full = 2.0 * (_prim(ym, s_of(ym), rho2) - p_lo)
    c = np.sqrt(np.maximum(rho2 - Z * Z, 0.0))
    hi = np.minimum(c, ym)
    live = hi > -c
    chord = _prim(hi, s_of(hi), rho2) - _prim(-c, s_of(-c), rho2)
    z_pos = np.where(live, full - (chord - Z * (hi + c)), full)
    z_neg = np.where(live, chord + Z * (hi + c), 0.0)
    return np.where(Z >= 0, z_pos, z_neg)


def disk_rect_area(y0, y1, z0, z1, rho):
    """Area of the disk of radius ``rho`` (centered at 0) inside ``[y0,y1]x[z0,z1]``."""
    f = disk_corner_area
    return f(y1, z1, rho) - f(y0, z1, rho) - f(y1, z0, rho) + f(y0, z0, rho)


def _tanh_sinh(level: float = 0.125, tmax: float = 3.0):
    t = np.arange(-tmax, tmax + 0.5 * level, level)
    u = 0.5 * np.pi * np.sinh(t)
    x = np.tanh(u)
    w = level * 0.5 * np.pi * np.cosh(t) / np.cosh(u) ** 2
    # 1 - x computed without cancellation for the endpoint clustering
    one_minus = 1.0 / (np.exp(u) * np.cosh(u))
    keep = one_minus > 0
    return x[keep], w[keep]


_TS_X, _TS_W = _tanh_sinh()


def box_ball_volume(lo, hi, r: float) -> np.ndarray:
    """Volume of ``[lo, hi] ∩ B(0, r)`` for boxes given as rows of ``lo``, ``hi``."""
    lo = np.atleast_2d(np.asarray(lo, dtype=float))
    hi = np.atleast_2d(np.asarray(hi, dtype=float))
    r = float(r)
    a = np.maximum(lo[:, 0], -r)
    b = np.minimum(hi[:, 0], r)
    y0, y1, z0, z1 = lo[:, 1], hi[:, 1], lo[:, 2], hi[:, 2]
    # distances at which the cross-section area changes form
    d = np.stack(
        [np.abs(y0), np.abs(y1), np.abs(z0), np.abs(z1)]
        + [np.hypot(yy, zz) for yy in (y0, y1) for zz in (z0, z1)],
        axis=1,
    )
    with np.errstate(invalid="ignore"):
        xb = np.sqrt(np.maximum(r * r - d * d, 0.0))
    brk = np.concatenate([a[:, None], b[:, None], xb, -xb], axis=1)
    brk = np.clip(brk, a[:, None], np.maximum(a, b)[:, None])
    brk.sort(axis=1)
    left, right = brk[:, :-1], brk[:, 1:]
    row, col = np.nonzero(right > left)
    half = 0.5 * (right - left)[row, col]
    mid = 0.5 * (right + left)[row, col]
    xs = mid[:, None] + half[:, None] * _TS_X
    rho = np.sqrt(np.maximum(r * r - xs * xs, 0.0))
    sel = lambda v: v[row][:, None]  # noqa: E731
    area = disk_rect_area(sel(y0), sel(y1), sel(z0), sel(z1), rho)
    vol = np.bincount(row, weights=(area @ _TS_W) * half, minlength=len(a))
    return np.where(b > a, vol, 0.0)


# ---------------------------------------------------------------------------
# cell weights on the torus


def _axis_pieces(grid: GridSpec, c: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-cell displacement intervals along one axis, as (n, 2) lo/hi arrays."""
    L, h = grid.box_length, grid.h
    d = np.mod(grid.coords() - c + 0.5 * L, L) - 0.5 * L
    lo, hi = d - 0.5 * h, d + 0.5 * h
    plo = np.stack([lo, np.zeros_like(lo)], axis=1)
    phi = np.stack([hi, np.zeros_like(hi)], axis=1)
    under = lo < -0.5 * L
    over = hi > 0.5 * L
    plo[under, 0], phi[under, 1], plo[under, 1] = -0.5 * L, 0.5 * L, lo[under] + L
    phi[over, 0], plo[over, 1], phi[over, 1] = 0.5 * L, -0.5 * L, hi[over] - L
    return plo, phi


def _near_far(plo, phi):
    length = phi - plo
    near = np.where((plo <= 0) & (phi >= 0), 0.0, np.minimum(np.abs(plo), np.abs(phi)))
    far = np.maximum(np.abs(plo), np.abs(phi))
    empty = length <= 0
    near = np.where(empty, np.inf, near)
    far = np.where(empty, 0.0, far)
    return length, near, far


def _ball_weights(grid: GridSpec, x0: tuple, r: float) -> np.ndarray:
    pieces = [_axis_pieces(grid, c) for c in x0]
    info = [_near_far(*pc) for pc in pieces]
    w = np.zeros(grid.shape)
    r2 = r * r
    for a in range(2):
        for b in range(2):
            for c in range(2):
                (la, na, fa), (lb, nb, fb), (lc, nc, fc) = (info[0], info[1], info[2])
                len3 = la[:, a][:, None, None] * lb[:, b][None, :, None] * lc[:, c][None, None, :]
                if not np.any(len3 > 0):
                    continue
                near2 = na[:, a][:, None, None] ** 2 + nb[:, b][None, :, None] ** 2 + nc[:, c][None, None, :] ** 2
                far2 = fa[:, a][:, None, None] ** 2 + fb[:, b][None, :, None] ** 2 + fc[:, c][None, None, :] ** 2
                inside = (far2 <= r2) & (len3 > 0)
                w[inside] += len3[inside]
                edge = (near2 < r2) & (far2 > r2) & (len3 > 0)
                if np.any(edge):
                    idx = np.nonzero(edge)
                    lo = np.stack([pieces[0][0][idx[0], a], pieces[1][0][idx[1], b], pieces[2][0][idx[2], c]], axis=1)
                    hi = np.stack([pieces[0][1][idx[0], a], pieces[1][1][idx[1], b], pieces[2][1][idx[2], c]], axis=1)
                    w[idx] += box_ball_volume(lo, hi, r)
    return w


@lru_cache(maxsize=64)
def _cached_weights(grid: GridSpec, x0: tuple, r: float) -> np.ndarray:
    w = _ball_weights(grid, x0, r)
    w.setflags(write=False)
    return w


def ball_weights(grid: GridSpec, x0, r: float) -> np.ndarray:
    """Quadrature weights (cell ∩ ball volumes) for ``B(x0, r)`` on the torus."""
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    x0 = tuple(float(c) for c in np.asarray(x0, dtype=float).reshape(3))
    return _cached_weights(grid, x0, float(r))


def ball_integral(grid: GridSpec, x0, r: float, values: np.ndarray) -> np.ndarray:
    """``sum(weights * f)`` over the last three axes of ``values``."""
    w = ball_weights(grid, x0, r)
    return np.tensordot(values, w, axes=([-3, -2, -1], [0, 1, 2]))


def ball_sums_all_centers(grid: GridSpec, r: float, values: np.ndarray) -> np.ndarray:
    """Ball integrals centred at every grid point, by circular correlation.

    ``out[..., i, j, k]`` is the integral over ``B(x_ijk, r)``; ``values`` may
    carry leading axes.
    """
    w0 = ball_weights(grid, (0.0, 0.0, 0.0), r)
    n = grid.n
    # sum_x w0(x - c) f(x): correlation, i.e. convolution with the mirrored stencil
    corr = np.conj(fwd(w0)) * fwd(values) * n**3
    return inv(corr, n)


# ---------------------------------------------------------------------------
# parabolic balls


@dataclass(frozen=True)
class ParabolicBall:
    """Space-time cylinder of radius ``r`` centred (spatially) at ``x0``.

    ``flavor`` "Q" is the backward cylinder ]t0 - r^2, t0[ x B(x0, r) (requires
    ``r^2 < t0``), "QQ" the centred one ]t0 - r^2, t0 + r^2[ x B(x0, r).
    """

    t0: float
    x0: tuple
    r: float
    flavor: str = FLAVOR_Q

    def __post_init__(self):
        object.__setattr__(self, "x0", tuple(float(c) for c in np.asarray(self.x0, dtype=float).reshape(3)))
        if not self.r > 0:
            raise ValueError("radius must be positive")
        if self.flavor not in (FLAVOR_Q, FLAVOR_QQ):
            raise ValueError(f"flavor must be 'Q' or 'QQ', got {self.flavor!r}")
        if self.flavor == FLAVOR_Q and not self.r**2 < self.t0:
            raise ValueError(f"backward cylinder needs r^2 < t0 (r^2 = {self.r**2:.6g}, t0 = {self.t0:.6g})")

    @property
    def slab(self) -> tuple[float, float]:
        lo = self.t0 - self.r**2
        hi = self.t0 if self.flavor == FLAVOR_Q else self.t0 + self.r**2
        return lo, hi


def clip_slab(times: np.ndarray, lo: float, hi: float) -> tuple[float, float, bool]:
    """Intersect ``[lo, hi]`` with the recorded range; flag whether it was cut."""
    if len(times) < 2:
        raise ValueError("need at least 2 recorded time slices")
    a, b = max(lo, float(times[0])), min(hi, float(times[-1]))
    tol = 1e-12 * max(1.0, abs(hi))
    if b - a <= tol:
        raise ValueError(f"time window [{lo:.6g}, {hi:.6g}] misses the recorded range")
    return a, b, (a - lo > tol) or (hi - b > tol)


def time_integral(times: np.ndarray, values: np.ndarray, a: float, b: float) -> float:
    """Exact integral over [a, b] of the piecewise-linear interpolant (trapezoid rule)."""
    inner = times[(times > a) & (times < b)]
    nodes = np.concatenate([[a], inner, [b]])
    vals = np.interp(nodes, times, values)
    return float(np.sum(0.5 * (vals[1:] + vals[:-1]) * np.diff(nodes)))


def time_sup(times: np.ndarray, values: np.ndarray, a: float, b: float) -> float:
    """Max over recorded slices in [a, b] and the interpolated window ends."""
    inside = values[(times >= a) & (times <= b)]
    ends = np.interp([a, b], times, values)
    return float(max(np.max(inside, initial=-np.inf), ends.max()))


def trapezoid_weights(times: np.ndarray, a: float, b: float) -> np.ndarray:
    """Weights ``W`` with ``W @ values == time_integral(times, values, a, b)``."""
    inner = times[(times > a) & (times < b)]
    nodes = np.concatenate([[a], inner, [b]])
    node_w = np.zeros(len(nodes))
    dt = np.diff(nodes)
    node_w[:-1] += 0.5 * dt
    node_w[1:] += 0.5 * dt
    # spread each node onto its bracketing slices (linear interpolation)
    j = np.clip(np.searchsorted(times, nodes, side="right") - 1, 0, len(times) - 2)
    theta = np.clip((nodes - times[j]) / (times[j + 1] - times[j]), 0.0, 1.0)
    w = np.zeros(len(times))
    np.add.at(w, j, node_w * (1.0 - theta))
    np.add.at(w, j + 1, node_w * theta)
    return w
