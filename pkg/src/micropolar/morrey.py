"""Sampled Morrey norms.

Spatial:    sup_{x0, r} ( r^(-3(1-p/q)) int_{B(x0,r)} |f|^p )^(1/p)
Parabolic:  sup_{t0, x0, r} ( r^(-5(1-p/q)) iint_{|t-t0|<r^2, B(x0,r)} |f|^p )^(1/p)

The sups run over a centre lattice, a finite radius set and recorded times,
so every value is a lower bound of the continuum norm.  Ball sums for all
centres at once come from :func:`micropolar.balls.ball_sums_all_centers`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .balls import ball_sums_all_centers, trapezoid_weights
from .ckn import TypeIReport, center_lattice
from .grid import GridSpec
from .solver import Trajectory

SPATIAL = "spatial"
PARABOLIC = "parabolic"
CENTERED = "centered"  # |t - t0| < r^2
BACKWARD = "backward"  # t0 - r^2 < t < t0


def default_radii(grid: GridSpec) -> np.ndarray:
    """Dyadic radii ``h 2^j`` up to ``L/2``."""
    out = []
    r = grid.h
    while r <= 0.5 * grid.box_length * (1 + 1e-12):
        out.append(r)
        r *= 2.0
    return np.array(out)


@dataclass(frozen=True)
class MorreyParams:
    p: float
    q: float
    radii: tuple | None = None  # None: default_radii(grid)
    stride: int = 2
    flavor: str = SPATIAL
    window: str = CENTERED

    def __post_init__(self):
        if not 1 < self.p <= self.q < math.inf:
            raise ValueError(f"need 1 < p <= q < inf, got p = {self.p}, q = {self.q}")
        if self.flavor not in (SPATIAL, PARABOLIC):
            raise ValueError(f"flavor must be {SPATIAL!r} or {PARABOLIC!r}")
        if self.window not in (CENTERED, BACKWARD):
            raise ValueError(f"window must be {CENTERED!r} or {BACKWARD!r}")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        if self.radii is not None:
            object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
            if len(self.radii) == 0:
                raise ValueError("radius set is empty")
            if any(r <= 0 for r in self.radii):
                raise ValueError("radii must be positive")

    def radius_set(self, grid: GridSpec) -> np.ndarray:
        return default_radii(grid) if self.radii is None else np.array(self.radii)


@dataclass
class MorreyEstimate:
    value: float
    argmax: tuple | None  # (centre index triple, radius[, time])
    p: float
    q: float
    flavor: str

    def as_dict(self) -> dict:
        return {"value": self.value, "argmax": self.argmax, "p": self.p, "q": self.q, "flavor": self.flavor}


def _density(data: np.ndarray, p: float) -> np.ndarray:
    data = np.asarray(data, dtype=float)
    if not np.all(np.isfinite(data)):
        raise ValueError("field has non-finite samples")
    mag2 = np.sum(data * data, axis=-4) if data.ndim >= 4 else data * data
    return mag2 ** (0.5 * p)


def _pick(sums: np.ndarray, centers: np.ndarray) -> np.ndarray:
    return np.maximum(sums[..., centers[:, 0], centers[:, 1], centers[:, 2]], 0.0)


def morrey_spatial(f, params: MorreyParams, grid: GridSpec | None = None) -> MorreyEstimate:
    """Sampled spatial Morrey norm of a scalar or vector field."""
    grid = grid if grid is not None else f.grid
    data = getattr(f, "data", f)
    p, q = params.p, params.q
    dens = _density(data, p)
    centers = center_lattice(grid, params.stride)
    best, arg = 0.0, None
    for r in params.radius_set(grid):
        vals = r ** (-3.0 * (1.0 - p / q)) * _pick(ball_sums_all_centers(grid, r, dens), centers)
        j = int(np.argmax(vals))
        if arg is None or vals[j] > best:
            best, arg = float(vals[j]), (tuple(int(c) for c in centers[j]), float(r))
    return MorreyEstimate(best ** (1.0 / p), arg, p, q, SPATIAL)


def parabolic_window(t0: float, r: float, window: str) -> tuple[float, float]:
    return (t0 - r * r, t0 + r * r) if window == CENTERED else (t0 - r * r, t0)


def morrey_parabolic(traj: Trajectory, params: MorreyParams, field: str = "u") -> MorreyEstimate:
    """Sampled parabolic Morrey norm over recorded ``t0``; windows are clipped to the record."""
    if len(traj.times) < 2:
        raise ValueError("need at least 2 recorded time slices")
    grid = traj.grid
    data = {"u": traj.u, "w": traj.w}[field]
    p, q = params.p, params.q
    dens = _density(data, p)
    centers = center_lattice(grid, params.stride)
    times = traj.times
    best, arg = 0.0, None
    for r in params.radius_set(grid):
        per_slice = _pick(ball_sums_all_centers(grid, r, dens), centers)  # (K, m)
        weight = r ** (-5.0 * (1.0 - p / q))
        for k, t0 in enumerate(times):
            lo, hi = parabolic_window(float(t0), r, params.window)
            a, b = max(lo, float(times[0])), min(hi, float(times[-1]))
            if b <= a:
                continue
            vals = weight * (trapezoid_weights(times, a, b) @ per_slice)
            j = int(np.argmax(vals))
            if arg is None or vals[j] > best:
                best, arg = float(vals[j]), (tuple(int(c) for c in centers[j]), float(r), float(t0))
    return MorreyEstimate(max(best, 0.0) ** (1.0 / p), arg, p, q, PARABOLIC)


def morrey(source, params: MorreyParams, **kw) -> MorreyEstimate:
    if params.flavor == SPATIAL:
        return morrey_spatial(source, params, **kw)
    return morrey_parabolic(source, params, **kw)


# ---------------------------------------------------------------------------
# type-I -> Morrey


EMBEDDING_CONSTANT = math.sqrt(2.0)


@dataclass
class BridgeResult:
    m23: MorreyEstimate  # L^inf_t M^{2,3}_x on the table
    m25: MorreyEstimate  # M^{2,5}_{t,x} on the same table
    c_e: float
    holds: bool

    @property
    def ratio(self) -> float:
        return self.m25.value / self.m23.value if self.m23.value > 0 else 0.0


def type_one_to_morrey_bridge(report: TypeIReport) -> BridgeResult:
    """Read both Morrey estimates off the type-I table and compare them.

    ``(1/r) int_B |u|^2 = r^(-3(1-2/3)) int_B |u|^2``, so the spatial
    ``M^{2,3}`` estimate is the square root of the table maximum.  The
    parabolic ``M^{2,5}`` bracket ``r^(-3) iint`` over ``|t - t0| < r^2``
    (clipped to the table's time range) integrates at most ``2 r^2`` of
    slices each bounded by that maximum, hence ``M^{2,5} <= sqrt(2) M^{2,3}``.
    """
    vals = np.maximum(report.values, 0.0)
    times = report.times
    if vals.size == 0:
        zero = MorreyEstimate(0.0, None, 2.0, 3.0, SPATIAL)
        return BridgeResult(zero, MorreyEstimate(0.0, None, 2.0, 5.0, PARABOLIC), EMBEDDING_CONSTANT, True)
    i, k, c = np.unravel_index(int(np.argmax(vals)), vals.shape)
    top = float(vals[i, k, c])
    m23 = MorreyEstimate(math.sqrt(top), (tuple(int(v) for v in report.centers[c]), float(report.radii[i]), float(times[k])), 2.0, 3.0, SPATIAL)
    best, arg = 0.0, None
    if len(times) >= 2:
        for i, r in enumerate(report.radii):
            for k, t0 in enumerate(times):
                a, b = max(t0 - r * r, times[0]), min(t0 + r * r, times[-1])
                if b <= a:
                    continue
                # r^-3 * int (r * table) dt
                br = (trapezoid_weights(times, a, b) @ vals[i]) / r**2
                j = int(np.argmax(br))
                if arg is None or br[j] > best:
                    best, arg = float(br[j]), (tuple(int(v) for v in report.centers[j]), float(r), float(t0))
    m25 = MorreyEstimate(math.sqrt(best), arg, 2.0, 5.0, PARABOLIC)
    holds = m25.value <= EMBEDDING_CONSTANT * m23.value * (1.0 + 1e-12)
    return BridgeResult(m23, m25, EMBEDDING_CONSTANT, bool(holds))
