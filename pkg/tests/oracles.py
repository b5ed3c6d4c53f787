"""Brute-force reference implementations for the diagnostics.

Everything here takes the slow road on purpose: cell weights come from all
27 periodic images of every cell clipped to the fundamental box, sups are
explicit loops over centres, radii and times, derivatives use the full
complex FFT, and time integrals integrate the linear interpolant interval by
interval.  Only :func:`micropolar.balls.box_ball_volume` is shared, and it
is checked against quadrature separately.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from micropolar.balls import box_ball_volume
from micropolar.grid import GridSpec


def cell_weights(grid: GridSpec, x0, r: float) -> np.ndarray:
    L, h, n = grid.box_length, grid.h, grid.n
    x = np.arange(n) * h
    idx = np.array(list(itertools.product(range(n), repeat=3)))
    centre = x[idx] - np.asarray(x0, dtype=float)
    lo_all, hi_all, owner = [], [], []
    for shift in itertools.product((-1, 0, 1), repeat=3):
        lo = np.maximum(centre - 0.5 * h + L * np.array(shift), -0.5 * L)
        hi = np.minimum(centre + 0.5 * h + L * np.array(shift), 0.5 * L)
        ok = np.all(hi > lo, axis=1)
        lo_all.append(lo[ok])
        hi_all.append(hi[ok])
        owner.append(np.nonzero(ok)[0])
    vols = box_ball_volume(np.concatenate(lo_all), np.concatenate(hi_all), r)
    w = np.bincount(np.concatenate(owner), weights=vols, minlength=n**3)
    return w.reshape(n, n, n)


class WeightBank:
    """Oracle weights about the origin, rolled onto lattice centres."""

    def __init__(self, grid: GridSpec):
        self.grid = grid
        self._cache: dict[float, np.ndarray] = {}

    def at(self, r: float, centre: tuple[int, int, int]) -> np.ndarray:
        if r not in self._cache:
            self._cache[r] = cell_weights(self.grid, (0.0, 0.0, 0.0), r)
        return np.roll(self._cache[r], centre, axis=(0, 1, 2))


def full_fft_grad_sq(grid: GridSpec, u: np.ndarray) -> np.ndarray:
    k = np.fft.fftfreq(grid.n, d=1.0 / grid.n) * (2 * np.pi / grid.box_length)
    k = k.copy()
    if grid.n % 2 == 0:
        k[grid.n // 2] = 0.0
    out = np.zeros(grid.shape)
    for i in range(3):
        uh = np.fft.fftn(u[i])
        for j in range(3):
            kj = k.reshape([-1 if a == j else 1 for a in range(3)])
            out += np.fft.ifftn(1j * kj * uh).real ** 2
    return out


def linear_integral(times, values, a: float, b: float) -> float:
    total = 0.0
    for k in range(len(times) - 1):
        t0, t1 = float(times[k]), float(times[k + 1])
        lo, hi = max(a, t0), min(b, t1)
        if hi <= lo:
            continue
        f = lambda t: values[k] + (values[k + 1] - values[k]) * (t - t0) / (t1 - t0)  # noqa: E731
        total += 0.5 * (f(lo) + f(hi)) * (hi - lo)
    return total


def linear_sup(times, values, a: float, b: float) -> float:
    best = -math.inf
    for k in range(len(times)):
        if a <= times[k] <= b:
            best = max(best, float(values[k]))
    for t in (a, b):
        best = max(best, float(np.interp(t, times, values)))
    return best


def ckn(traj, ball, kappa: float, tau0: float) -> dict:
    grid = traj.grid
    a, b = max(ball.slab[0], traj.times[0]), min(ball.slab[1], traj.times[-1])
    w = cell_weights(grid, ball.x0, ball.r)
    p_all = traj.pressure()
    u2s, g2s, u3s, p32s, pm32s = [], [], [], [], []
    for k in range(len(traj.times)):
        u, p = traj.u[k], p_all[k]
        u2 = np.sum(u**2, axis=0)
        u2s.append(np.sum(w * u2))
        g2s.append(np.sum(w * full_fft_grad_sq(grid, u)))
        u3s.append(np.sum(w * u2**1.5))
        p32s.append(np.sum(w * np.abs(p) ** 1.5))
        pm32s.append(np.sum(w * np.abs(p - p.mean()) ** 1.5))
    t, r = traj.times, ball.r
    A = linear_sup(t, u2s, a, b) / r
    alpha = linear_integral(t, g2s, a, b) / r
    lam = linear_integral(t, u3s, a, b) / r**2
    P = linear_integral(t, p32s, a, b) / r**2
    Pm = linear_integral(t, pm32s, a, b) / r**2
    weight = r ** (-3.0 * (1.0 - 5.0 / tau0))
    return {
        "A_r": A, "alpha_r": alpha, "lambda_r": lam, "P_r": P,
        "Lambda_r": weight * lam, "Pbb_r": weight * P,
        "O_r": weight * lam + kappa**6 * weight * P, "E_r": A + alpha + Pm,
    }


def morrey_spatial(grid, data, p, q, radii, stride) -> float:
    bank = WeightBank(grid)
    dens = np.sum(data**2, axis=0) ** (0.5 * p)
    best = 0.0
    for r in radii:
        for c in itertools.product(range(0, grid.n, stride), repeat=3):
            val = r ** (-3.0 * (1 - p / q)) * np.sum(bank.at(r, c) * dens)
            best = max(best, val)
    return best ** (1 / p)


def morrey_parabolic(traj, p, q, radii, stride, centred=True) -> float:
    grid, t = traj.grid, traj.times
    bank = WeightBank(grid)
    dens = np.sum(traj.u**2, axis=1) ** (0.5 * p)
    best = 0.0
    for r in radii:
        for c in itertools.product(range(0, grid.n, stride), repeat=3):
            w = bank.at(r, c)
            per = [np.sum(w * d) for d in dens]
            for t0 in t:
                lo, hi = t0 - r * r, (t0 + r * r) if centred else t0
                a, b = max(lo, t[0]), min(hi, t[-1])
                if b <= a:
                    continue
                best = max(best, r ** (-5.0 * (1 - p / q)) * linear_integral(t, per, a, b))
    return best ** (1 / p)


def type_one(traj, r0: float, T: float, radii) -> float:
    grid = traj.grid
    bank = WeightBank(grid)
    best = 0.0
    for r in radii:
        for k, t in enumerate(traj.times):
            if not (T - r * r < t <= T):
                continue
            u2 = np.sum(traj.u[k] ** 2, axis=0)
            for c in itertools.product(range(grid.n), repeat=3):
                best = max(best, np.sum(bank.at(r, c) * u2) / r)
    return best


def concentration(traj, T: float, S: float, centre) -> list[float]:
    out = []
    for k, t in enumerate(traj.times):
        if t >= T:
            continue
        u3 = np.sum(traj.u[k] ** 2, axis=0) ** 1.5
        out.append(float(np.sum(cell_weights(traj.grid, centre, math.sqrt((T - t) / S)) * u3)))
    return out
