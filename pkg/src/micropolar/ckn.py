"""Scaled local quantities of the epsilon-regularity theory, the local energy
inequality, and type-I / L^3-concentration monitors.

On a parabolic ball of radius r:

    A_r     = sup_s (1/r)   int_B |u|^2
    alpha_r =       (1/r)   iint_Q |grad u|^2
    lambda_r =      (1/r^2) iint_Q |u|^3
    P_r     =       (1/r^2) iint_Q |p|^(3/2)

Spatial integrals use exact cell-ball volumes (see :mod:`micropolar.balls`);
time integrals the trapezoid rule on recorded slices (exact for the linear
interpolant on the clipped window).  Every verdict is a *candidate* verdict:
the universal constants of the theory are not known numerically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .balls import (
    FLAVOR_Q,
    ParabolicBall,
    ball_integral,
    ball_sums_all_centers,
    clip_slab,
    time_integral,
    time_sup,
)
from .grid import GridSpec, curl_hat, fwd, inv, tensor_grad_hat
from .gronwall import solve_kappa
from .solver import Trajectory

REGULAR = "regular-candidate"
SINGULAR = "singular-candidate"
INCONCLUSIVE = "inconclusive"
DEFAULT_EPS = 1e-2
DEFAULT_TAU0 = 6.0


# ---------------------------------------------------------------------------
# per-slice densities


def grad_sq(grid: GridSpec, u: np.ndarray) -> np.ndarray:
    """``|grad (x) u|^2 = sum_ij (d_j u_i)^2`` on the grid."""
    g = inv(tensor_grad_hat(grid, fwd(u)), grid.n)
    return np.sum(g * g, axis=(0, 1))


def densities(traj: Trajectory, k: int) -> dict[str, np.ndarray]:
    u = traj.u[k]
    p = traj.pressure()[k]
    u2 = np.sum(u * u, axis=0)
    return {
        "u2": u2,
        "grad2": grad_sq(traj.grid, u),
        "u3": u2**1.5,
        "p32": np.abs(p) ** 1.5,
        "pm32": np.abs(p - p.mean()) ** 1.5,
    }


def _window_slices(times: np.ndarray, a: float, b: float) -> np.ndarray:
    """Indices of slices needed to integrate/interpolate on [a, b]."""
    lo = max(0, int(np.searchsorted(times, a, side="right")) - 1)
    hi = min(len(times) - 1, int(np.searchsorted(times, b, side="left")))
    return np.arange(lo, hi + 1)


def _slice_integrals(traj: Trajectory, x0, r: float, idx: np.ndarray) -> dict[str, np.ndarray]:
    out: dict[str, list] = {}
    for k in idx:
        for name, dens in densities(traj, int(k)).items():
            out.setdefault(name, []).append(float(ball_integral(traj.grid, x0, r, dens)))
    return {name: np.array(v) for name, v in out.items()}


# ---------------------------------------------------------------------------
# reports


@dataclass
class CknReport:
    ball: ParabolicBall
    A_r: float
    alpha_r: float
    lambda_r: float
    P_r: float
    Lambda_r: float
    Pbb_r: float
    O_r: float
    kappa: float
    tau0: float
    E_r: float
    verdict: str
    eps: float
    clipped: bool
    window: tuple[float, float]

    @property
    def scaled_sum(self) -> float:
        """``(1/r^2) iint (|u|^3 + |p|^(3/2)) = lambda_r + P_r``."""
        return self.lambda_r + self.P_r

    def as_dict(self) -> dict:
        return {
            "t0": self.ball.t0,
            "x0": list(self.ball.x0),
            "r": self.ball.r,
            "flavor": self.ball.flavor,
            "A_r": self.A_r,
            "alpha_r": self.alpha_r,
            "lambda_r": self.lambda_r,
            "P_r": self.P_r,
            "Lambda_r": self.Lambda_r,
            "Pbb_r": self.Pbb_r,
            "O_r": self.O_r,
            "kappa": self.kappa,
            "tau0": self.tau0,
            "E_r": self.E_r,
            "verdict": self.verdict,
            "eps": self.eps,
            "clipped": self.clipped,
            "window": list(self.window),
        }


def _check_params(kappa: float, tau0: float) -> None:
    if not 5.0 < tau0 <= 7.5:
        raise ValueError(f"tau0 must lie in (5, 15/2], got {tau0}")
    if not 0 < kappa < 0.5:
        raise ValueError(f"kappa must lie in (0, 1/2), got {kappa}")


def ckn_quantities(
    traj: Trajectory,
    ball: ParabolicBall,
    kappa: float | None = None,
    tau0: float = DEFAULT_TAU0,
    eps: float = DEFAULT_EPS,
) -> CknReport:
    """All scaled quantities on one parabolic ball, plus the candidate verdict."""
    if kappa is None:
        kappa = solve_kappa(1.0, tau0)
    _check_params(kappa, tau0)
    times = traj.times
    a, b, clipped = clip_slab(times, *ball.slab)
    idx = _window_slices(times, a, b)
    ints = _slice_integrals(traj, ball.x0, ball.r, idx)
    ts = times[idx]
    r = ball.r
    A = time_sup(ts, ints["u2"], a, b) / r
    alpha = time_integral(ts, ints["grad2"], a, b) / r
    lam = time_integral(ts, ints["u3"], a, b) / r**2
    P = time_integral(ts, ints["p32"], a, b) / r**2
    Pm = time_integral(ts, ints["pm32"], a, b) / r**2
    weight = r ** (-3.0 * (1.0 - 5.0 / tau0))
    Lam, Pbb = weight * lam, weight * P
    report = CknReport(
        ball, A, alpha, lam, P, Lam, Pbb, Lam + kappa**6 * Pbb, kappa, tau0, A + alpha + Pm,
        INCONCLUSIVE, eps, clipped, (a, b),
    )
    if ball.flavor == FLAVOR_Q:
        report.verdict = epsilon_regularity_verdict(report, eps)
    return report


def epsilon_regularity_verdict(report: CknReport, eps: float = DEFAULT_EPS) -> str:
    """Regular candidate iff ``lambda_r + P_r < eps`` (strict); clipped balls are inconclusive."""
    if report.ball.flavor != FLAVOR_Q:
        raise ValueError("the verdict is defined on backward (Q) cylinders only")
    if not eps > 0:
        raise ValueError("eps must be positive")
    if report.clipped:
        return INCONCLUSIVE
    return REGULAR if report.scaled_sum < eps else SINGULAR


def lemma_b1_ratio(report: CknReport) -> float:
    """``lambda_r^(1/3) / (A_r + alpha_r)^(1/2)``, defined as 0 when both vanish."""
    den = report.A_r + report.alpha_r
    if den == 0:
        return 0.0
    return report.lambda_r ** (1.0 / 3.0) / math.sqrt(den)


def e_r_functional(traj: Trajectory, r: float, window: tuple[float, float], x0=(0.0, 0.0, 0.0)) -> float:
    """``sup (1/r) int|u|^2 + (1/r) iint|grad u|^2 + (1/r^2) iint|p - mean p|^(3/2)`` on a window."""
    if not r > 0:
        raise ValueError("r must be positive")
    a, b, _ = clip_slab(traj.times, float(window[0]), float(window[1]))
    idx = _window_slices(traj.times, a, b)
    ints = _slice_integrals(traj, x0, r, idx)
    ts = traj.times[idx]
    return (
        time_sup(ts, ints["u2"], a, b) / r
        + time_integral(ts, ints["grad2"], a, b) / r
        + time_integral(ts, ints["pm32"], a, b) / r**2
    )


@dataclass
class RadiusSweep:
    radii: np.ndarray
    values: np.ndarray  # lambda_r + P_r
    slope: float


def radius_sweep(traj: Trajectory, t0: float, x0, radii, tau0: float = DEFAULT_TAU0) -> RadiusSweep:
    """``lambda_r + P_r`` over radii and the least-squares log-log slope."""
    radii = np.sort(np.asarray(radii, dtype=float))
    vals = np.array([ckn_quantities(traj, ParabolicBall(t0, x0, r), tau0=tau0).scaled_sum for r in radii])
    if np.any(vals <= 0):
        slope = math.nan
    else:
        slope = float(np.polyfit(np.log(radii), np.log(vals), 1)[0])
    return RadiusSweep(radii, vals, slope)


# ---------------------------------------------------------------------------
# test functions


def _smoothstep_derivs(x):
    """Value, first and second derivative of the C-infinity step (0 at x<=0, 1 at x>=1)."""
    x = np.asarray(x, dtype=float)
    inside = (x > 0) & (x < 1)
    xs = np.where(inside, x, 0.5)
    q = 1.0 / xs - 1.0 / (1.0 - xs)
    s = expit(-q)
    q1 = -1.0 / xs**2 - 1.0 / (1.0 - xs) ** 2
    q2 = 2.0 / xs**3 - 2.0 / (1.0 - xs) ** 3
    s1 = -q1 * s * (1.0 - s)
    s2 = -q2 * s * (1.0 - s) - q1 * s1 * (1.0 - 2.0 * s)
    val = np.where(inside, s, np.where(x >= 1, 1.0, 0.0))
    return val, np.where(inside, s1, 0.0), np.where(inside, s2, 0.0)


def heat_kernel(tau, R):
    tau = np.asarray(tau, dtype=float)
    return (4.0 * np.pi * tau) ** -1.5 * np.exp(-np.asarray(R) ** 2 / (4.0 * tau))


@dataclass
class SchefferTestFunction:
    """``phi(s,y) = r^2 gamma((s-t0)/rho^2, (y-x0)/rho) theta((s-t0)/r^2) g_{4r^2+t0-s}(x0-y)``.

    ``gamma`` is a time step rising on [-1, -1/4] times a radial bump equal to 1
    on |z| <= 1/2 and 0 for |z| >= 1; ``theta`` is 1 below 1 and 0 above 2;
    ``g`` is the heat kernel.  ``scale`` multiplies the whole function.
    """

    t0: float
    x0: tuple
    r: float
    rho: float
    scale: float = 1.0

    def __post_init__(self):
        if not 0 < self.r <= 0.5 * self.rho:
            raise ValueError(f"need 0 < r <= rho/2 (r = {self.r}, rho = {self.rho})")
        self.x0 = tuple(float(c) for c in np.asarray(self.x0, dtype=float).reshape(3))

    @property
    def support_start(self) -> float:
        return self.t0 - self.rho**2

    def scaled(self, c: float) -> "SchefferTestFunction":
        return SchefferTestFunction(self.t0, self.x0, self.r, self.rho, self.scale * c)

    # factors -----------------------------------------------------------
    def _time(self, s):
        sig = (s - self.t0) / self.rho**2
        a, a1, _ = _smoothstep_derivs((sig + 1.0) / 0.75)
        sig2 = (s - self.t0) / self.r**2
        th, th1, _ = _smoothstep_derivs(2.0 - sig2)
        val = a * th
        der = a1 / (0.75 * self.rho**2) * th - a * th1 / self.r**2
        return val, der

    def _radial(self, R):
        b, b1, b2 = _smoothstep_derivs(2.0 - 2.0 * R / self.rho)
        return b, -2.0 * b1 / self.rho, 4.0 * b2 / self.rho**2

    def evaluate(self, s: float, disp: np.ndarray):
        """``(phi, d_s phi, grad phi, lap phi)`` at time ``s`` and displacements ``y - x0``.

        ``disp`` has shape (3, ...).
        """
        disp = np.asarray(disp, dtype=float)
        R = np.sqrt(np.sum(disp**2, axis=0))
        tau = 4.0 * self.r**2 + self.t0 - s
        c = self.scale * self.r**2
        T, T1 = self._time(s)
        if tau <= 0 or (T == 0 and T1 == 0):
            z = np.zeros_like(R)
            return z, z, np.zeros_like(disp), z
        G = heat_kernel(tau, R)
        lapG = G * (R**2 / (4 * tau**2) - 1.5 / tau)
        dsG = -lapG  # backward heat equation
        B, B1, B2 = self._radial(R)
        with np.errstate(invalid="ignore", divide="ignore"):
            unit = np.where(R > 0, disp / np.where(R > 0, R, 1.0), 0.0)
            lapB = B2 + np.where(R > 0, 2.0 * B1 / np.where(R > 0, R, 1.0), 0.0)
        gradB = B1 * unit
        gradG = -disp / (2.0 * tau) * G
        phi = c * T * B * G
        dphi = c * (T1 * B * G + T * B * dsG)
        grad = c * T * (gradB * G + B * gradG)
        lap = c * T * (lapB * G + 2.0 * np.sum(gradB * gradG, axis=0) + B * lapG)
        return phi, dphi, grad, lap

    def heat_operator(self, s: float, disp: np.ndarray) -> np.ndarray:
        _, dphi, _, lap = self.evaluate(s, disp)
        return dphi + lap


@dataclass
class SchefferConstants:
    lower: float  # min r*phi on Q_r
    upper: float  # max r*phi on Q_rho
    grad: float  # max r^2 |grad phi| on Q_rho
    heat: float  # max rho^5/r^2 |(d_s + Lap) phi| on Q_rho
    outside_max: float  # max |phi| sampled outside the centred cylinder of radius rho


def scheffer_constants(tf: SchefferTestFunction, n_space: int = 21, n_time: int = 21) -> SchefferConstants:
    """Fit the four constants on a tensor sample of Q_rho, Q_r and the exterior."""
    r, rho = tf.r, tf.rho
    lin = np.linspace(-1.0, 1.0, n_space)
    cube = np.array(np.meshgrid(lin, lin, lin, indexing="ij"))
    ball = cube[:, np.sum(cube**2, axis=0) < 1.0]  # (3, m) unit-ball sample
    lower, upper, grad, heat = math.inf, 0.0, 0.0, 0.0
    for s in tf.t0 - r**2 * np.linspace(0.0, 1.0, n_time, endpoint=False)[::-1][:-1]:
        phi, _, _, _ = tf.evaluate(s, r * ball)
        lower = min(lower, float(np.min(r * phi)))
    for s in tf.t0 - rho**2 * np.linspace(0.0, 1.0, n_time)[:-1]:
        phi, dphi, g, lap = tf.evaluate(s, rho * ball)
        upper = max(upper, float(np.max(r * phi)))
        grad = max(grad, float(np.max(r**2 * np.sqrt(np.sum(g**2, axis=0)))))
        heat = max(heat, float(np.max(np.abs(dphi + lap) * rho**5 / r**2)))
    outside = 0.0
    shell = cube[:, np.sum(cube**2, axis=0) >= 1.0] * rho * 1.5
    for s in np.concatenate([tf.t0 - rho**2 * np.array([1.5, 1.2, 1.0]), tf.t0 - rho**2 * np.linspace(0, 1, 5)]):
        phi_out = tf.evaluate(s, shell)[0]
        outside = max(outside, float(np.max(np.abs(phi_out))))
        if s <= tf.t0 - rho**2:
            phi_in = tf.evaluate(s, rho * ball)[0]
            outside = max(outside, float(np.max(np.abs(phi_in))))
    return SchefferConstants(lower, upper, grad, heat, outside)


def scheffer_test_function(ball: ParabolicBall, rho: float) -> SchefferTestFunction:
    return SchefferTestFunction(ball.t0, ball.x0, ball.r, rho)


def _displacements(grid: GridSpec, x0) -> np.ndarray:
    L = grid.box_length
    c = np.asarray(x0, dtype=float).reshape(3, 1, 1, 1)
    return np.mod(grid.mesh() - c + 0.5 * L, L) - 0.5 * L


@dataclass
class LocalEnergyTerms:
    lhs_now: float
    lhs_dissipation: float
    heat: float
    pressure: float
    transport: float
    coupling: float

    @property
    def residual(self) -> float:
        rhs = self.heat + self.pressure + self.transport + self.coupling
        return rhs - (self.lhs_now + self.lhs_dissipation)

    @property
    def scale(self) -> float:
        return max(abs(self.lhs_now), abs(self.lhs_dissipation), abs(self.heat), abs(self.pressure), abs(self.transport), abs(self.coupling))


def local_energy_terms(traj: Trajectory, testfn, t: float | None = None) -> LocalEnergyTerms:
    """All terms of the local energy inequality at time ``t`` (default: last slice).

    Time integrals are trapezoid sums over recorded slices up to ``t``.
    """
    times = traj.times
    if t is None:
        t = float(times[-1])
    k_end = int(np.searchsorted(times, t - 1e-12 * max(1.0, abs(t)), side="left"))
    if k_end >= len(times) or abs(times[k_end] - t) > 1e-12 * max(1.0, abs(t)):
        raise ValueError("t must be a recorded time")
    if testfn.support_start < times[0] - 1e-12:
        raise ValueError("test function support escapes the recorded slab")
    if k_end < 1:
        raise ValueError("need at least 2 slices before t")
    grid = traj.grid
    disp = _displacements(grid, testfn.x0)
    if np.max(getattr(testfn, "rho", 0.0)) >= 0.5 * grid.box_length:
        raise ValueError("test function support does not fit in the box")
    dv = grid.cell_volume
    p_all = traj.pressure()
    rows = []
    for k in range(k_end + 1):
        s = float(times[k])
        u = traj.u[k]
        u_hat = fwd(u)
        phi, dphi, gphi, lphi = testfn.evaluate(s, disp)
        u2 = np.sum(u * u, axis=0)
        u_dot_g = np.sum(u * gphi, axis=0)
        curl_w = inv(curl_hat(grid, fwd(traj.w[k])), grid.n)
        rows.append(
            (
                dv * np.sum(u2 * phi),
                dv * np.sum(grad_sq(grid, u) * phi) if np.any(phi) else 0.0,
                dv * np.sum((dphi + lphi) * u2),
                dv * np.sum(p_all[k] * u_dot_g),
                dv * np.sum(u2 * u_dot_g),
                dv * np.sum(np.sum(curl_w * u, axis=0) * phi),
            )
        )
        del u_hat
    rows = np.array(rows)
    ts = times[: k_end + 1]
    trap = lambda col: float(np.sum(0.5 * (col[1:] + col[:-1]) * np.diff(ts)))  # noqa: E731
    return LocalEnergyTerms(
        float(rows[-1, 0]),
        2.0 * trap(rows[:, 1]),
        trap(rows[:, 2]),
        2.0 * trap(rows[:, 3]),
        trap(rows[:, 4]),
        trap(rows[:, 5]),
    )


def local_energy_residual(traj: Trajectory, testfn, t: float | None = None) -> float:
    """RHS - LHS of the local energy inequality; nonnegative for suitable solutions."""
    return local_energy_terms(traj, testfn, t).residual


# ---------------------------------------------------------------------------
# type-I and concentration monitors


def center_lattice(grid: GridSpec, stride: int = 1) -> np.ndarray:
    """Grid-point centres as index triples (m, 3), every ``stride``-th point per axis."""
    if stride < 1:
        raise ValueError("stride must be >= 1")
    ax = np.arange(0, grid.n, stride)
    return np.array(np.meshgrid(ax, ax, ax, indexing="ij")).reshape(3, -1).T


def dyadic_radii(r0: float, count: int) -> np.ndarray:
    return r0 * 2.0 ** -np.arange(count)


@dataclass
class TypeIReport:
    """Sampled type-I functional and the table it was taken from.

    ``values[i, k, c]`` is ``(1/r_i) int_{B(x_c, r_i)} |u(t_k)|^2`` for the
    table slices ``times`` (all recorded times in ``]T - r0^2, T]``).
    """

    M: float
    argmax: tuple  # (centre index triple, radius, time)
    radii: np.ndarray
    times: np.ndarray
    centers: np.ndarray
    values: np.ndarray = field(repr=False)
    T: float = 0.0
    grid: GridSpec | None = None


def type_one_monitor(
    traj: Trajectory,
    r0: float,
    T: float,
    radii=None,
    n_radii: int = 4,
    stride: int = 1,
) -> TypeIReport:
    """Sampled sup of ``(1/r) int_{B(x0,r)} |u|^2`` over centres, radii <= r0, times in ]T-r^2, T]."""
    if not r0 > 0:
        raise ValueError("r0 must be positive")
    if not r0**2 < T:
        raise ValueError("need r0^2 < T")
    radii = dyadic_radii(r0, n_radii) if radii is None else np.asarray(radii, dtype=float)
    if len(radii) == 0 or np.any(radii <= 0) or np.any(radii > r0 * (1 + 1e-12)):
        raise ValueError("radii must be a nonempty set in (0, r0]")
    grid = traj.grid
    sel = (traj.times > T - r0**2) & (traj.times <= T)
    if not np.any(sel):
        raise ValueError("no recorded time in ]T - r0^2, T]")
    times = traj.times[sel]
    centers = center_lattice(grid, stride)
    u2 = np.sum(traj.u[sel] ** 2, axis=1)
    values = np.empty((len(radii), len(times), len(centers)))
    for i, r in enumerate(radii):
        sums = ball_sums_all_centers(grid, r, u2)
        values[i] = sums[:, centers[:, 0], centers[:, 1], centers[:, 2]] / r
    return _type_one_from_table(radii, times, centers, values, T, grid)


def _type_one_from_table(radii, times, centers, values, T, grid) -> TypeIReport:
    best, arg = 0.0, None
    for i, r in enumerate(radii):
        live = times > T - r**2
        if not np.any(live):
            continue
        block = values[i][live]
        j = np.unravel_index(int(np.argmax(block)), block.shape)
        if arg is None or block[j] > best:
            best = float(block[j])
            arg = (tuple(int(c) for c in centers[j[1]]), float(r), float(times[live][j[0]]))
    return TypeIReport(max(best, 0.0), arg, np.asarray(radii), times, centers, values, T, grid)


@dataclass
class ConcentrationSeries:
    times: np.ndarray
    radii: np.ndarray
    masses: np.ndarray
    S: float
    T: float
    eps: float
    window: tuple[float, float]
    passed: bool
    truncated: bool  # some times dropped because the ball fell below min_cells * h
    dropped_times: np.ndarray
    h: float = 0.0

    @property
    def cells(self) -> np.ndarray:
        """Ball radii in grid cells; quadrature error grows as this shrinks."""
        return self.radii / self.h


def concentration_monitor(
    traj: Trajectory,
    T: float,
    S: float,
    eps: float,
    delta: float | None = None,
    center=(0.0, 0.0, 0.0),
    min_cells: float = 1.0,
) -> ConcentrationSeries:
    """``int_{B(x0, sqrt((T-t)/S))} |u|^3`` at recorded ``t < T``; pass iff >= eps on ]T-delta, T[."""
    # S = 1 is admitted as the closed end: it is the change-of-variables case
    if not 0 < S <= 1:
        raise ValueError("S must lie in (0, 1]")
    grid = traj.grid
    sel = traj.times < T
    if not np.any(sel):
        raise ValueError("no recorded time before T")
    times = traj.times[sel]
    radii = np.sqrt((T - times) / S)
    resolved = radii >= min_cells * grid.h
    masses = []
    for k in np.nonzero(sel)[0][resolved]:
        u3 = np.sum(traj.u[k] ** 2, axis=0) ** 1.5
        masses.append(float(ball_integral(grid, center, float(np.sqrt((T - traj.times[k]) / S)), u3)))
    masses = np.array(masses)
    kept_t, kept_r = times[resolved], radii[resolved]
    delta = T - float(times[0]) if delta is None else delta
    win = (T - delta, T)
    in_win = kept_t > win[0]
    passed = bool(np.any(in_win) and np.all(masses[in_win] >= eps))
    return ConcentrationSeries(kept_t, kept_r, masses, S, T, eps, win, passed, bool(np.any(~resolved)), times[~resolved], grid.h)


# ---------------------------------------------------------------------------
# self-similar profiles


@dataclass(frozen=True)
class BumpProfile:
    """``U = curl(psi e3)`` with ``psi(x) = amp * exp(1 - 1/(1 - |x|^2/R^2))`` for |x| < R.

    Support radius ``R < 1``; ``U = psi'(|x|) (x2, -x1, 0) / |x|``.
    """

    R: float = 0.95
    amp: float = 1.0

    def dpsi(self, rad):
        rad = np.asarray(rad, dtype=float)
        q = rad**2 / self.R**2
        inside = q < 1
        qs = np.where(inside, q, 0.0)
        e = np.exp(1.0 - 1.0 / (1.0 - qs))
        der = -self.amp * e * (2.0 * rad / self.R**2) / (1.0 - qs) ** 2
        return np.where(inside, der, 0.0)

    def field(self, x: np.ndarray) -> np.ndarray:
        """``U(x)`` for ``x`` of shape (3, ...)."""
        rad = np.sqrt(np.sum(x**2, axis=0))
        with np.errstate(invalid="ignore", divide="ignore"):
            f = np.where(rad > 0, self.dpsi(rad) / np.where(rad > 0, rad, 1.0), 0.0)
        return np.array([f * x[1], -f * x[0], np.zeros_like(f)])


def self_similar_trajectory(grid: GridSpec, profile: BumpProfile, T: float, times, center=(0.0, 0.0, 0.0)) -> Trajectory:
    """Samples of ``u(t,x) = (T-t)^(-1/2) U((x - x0)/sqrt(T-t))`` (w = 0, p recovered lazily)."""
    times = np.asarray(times, dtype=float)
    if np.any(times >= T):
        raise ValueError("times must precede T")
    disp = _displacements(grid, center)
    us = []
    for t in times:
        s = math.sqrt(T - t)
        us.append(profile.field(disp / s) / s)
    us = np.array(us)
    return Trajectory(grid, times, us, np.zeros_like(us))
