"""Pseudo-spectral integration of the micropolar system on the 3-torus.

    d_t u = Lap u - (u.grad) u - grad p + 1/2 curl w,      div u = 0
    d_t w = Lap w + grad div w - w - (u.grad) w + 1/2 curl u

The pressure is removed by the Leray projector and recovered on demand from
``-Lap p = div div (u x u)``.  Time stepping is an integrating-factor RK2: the
per-mode linear operators (``-|k|^2`` for u and ``-(|k|^2+1) - k k^T`` for w)
are applied exactly, the transport and curl-coupling terms explicitly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import cumulative_simpson

from .grid import (
    GridSpec,
    ScalarField,
    VectorField,
    curl_hat,
    dealias,
    div_hat,
    fwd,
    grad_div_hat,
    inv,
    lap_hat,
    leray_hat,
    spectral_inner,
)

DIV_TOL = 1e-10


class NumericalBlowUp(RuntimeError):
    """Raised when a step produces non-finite values; carries the last valid state."""

    def __init__(self, message: str, last_state: "State"):
        super().__init__(message)
        self.last_state = last_state


@dataclass
class State:
    u: VectorField
    w: VectorField
    t: float = 0.0
    p: ScalarField | None = None

    def __post_init__(self):
        if self.u.grid != self.w.grid:
            raise ValueError("u and w live on different grids")
        if self.t < 0:
            raise ValueError("time must be nonnegative")

    @property
    def grid(self) -> GridSpec:
        return self.u.grid


@dataclass(frozen=True)
class SolverConfig:
    """Run parameters.

    ``dt=None`` picks ``cfl * h / max|u|`` from the initial state, capped at
    ``dt_max``; the step is then shrunk so that ``t_end`` is hit exactly.
    ``coupling`` and ``nonlinear`` switch off the curl coupling and the
    transport terms, which is how the decoupled and linear reference cases
    are produced.
    """

    t_end: float = 1.0
    dt: float | None = None
    cfl: float = 0.5
    dt_max: float = 1e-2
    nu_scheme: str = "integrating-factor"
    dealias: bool = True
    record_every: int = 1
    seed: int = 0
    coupling: bool = True
    nonlinear: bool = True
    record_pressure: bool = True

    def __post_init__(self):
        if self.nu_scheme != "integrating-factor":
            raise ValueError(f"unsupported nu_scheme {self.nu_scheme!r}")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end >= 0:
            raise ValueError("t_end must be nonnegative")
        if not 0 < self.cfl:
            raise ValueError("cfl must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


def cfl_dt(u: VectorField, cfl: float = 0.5, dt_max: float = 1e-2) -> float:
    """Advective time step bound ``cfl * h / max|u|``, capped at ``dt_max``."""
    umax = float(np.max(u.magnitude()))
    if umax == 0:
        return dt_max
    return min(dt_max, cfl * u.grid.h / umax)


def w_matrix(w: VectorField) -> np.ndarray:
    """Antisymmetric matrix field with row divergence equal to curl w.

    Entry [i, j] sits at ``out[i, j]``; ``sum_j d_j out[i, j] = (curl w)_i``.
    """
    w1, w2, w3 = w.data
    z = np.zeros_like(w1)
    return np.array([[z, w3, -w2], [-w3, z, w1], [w2, -w1, z]])


def w_matrix_divergence(grid: GridSpec, mat: np.ndarray) -> np.ndarray:
    """Row divergence ``sum_j d_j M[i, j]`` computed spectrally."""
    m_hat = fwd(mat)
    k = grid.wavenumbers
    return inv(1j * np.einsum("jxyz,ijxyz->ixyz", k, m_hat), grid.n)


# ---------------------------------------------------------------------------
# spectral right-hand side pieces


def _product(grid: GridSpec, a: np.ndarray, use_dealias: bool) -> np.ndarray:
    out = fwd(a)
    return dealias(out, grid) if use_dealias else out


def explicit_hat(grid: GridSpec, u_hat, w_hat, cfg: SolverConfig):
    """Transport and coupling terms of both equations, in spectral form."""
    n = grid.n
    nu = np.zeros_like(u_hat)
    nw = np.zeros_like(w_hat)
    if cfg.nonlinear:
        u = inv(u_hat, n)
        vort = inv(curl_hat(grid, u_hat), n)
        # rotational form: -(u.grad)u = u x curl u - grad |u|^2/2, gradient dropped by P
        nu += _product(grid, np.cross(u, vort, axis=0), cfg.dealias)
        w = inv(w_hat, n)
        flux = _product(grid, w[:, None] * u[None, :], cfg.dealias)  # [i, j] = w_i u_j
        nw -= 1j * np.einsum("jxyz,ijxyz->ixyz", grid.wavenumbers, flux)
    if cfg.coupling:
        nu += 0.5 * curl_hat(grid, w_hat)
        nw += 0.5 * curl_hat(grid, u_hat)
    return leray_hat(grid, nu), nw


def linear_hat(grid: GridSpec, u_hat, w_hat):
    return lap_hat(grid, u_hat), lap_hat(grid, w_hat) + grad_div_hat(grid, w_hat) - w_hat


def _check_div_free(u: VectorField) -> None:
    d = inv(div_hat(u.grid, fwd(u.data)), u.grid.n)
    bound = DIV_TOL * max(1.0, u.norm_inf())
    if np.max(np.abs(d)) > bound:
        raise ValueError(f"u is not divergence-free: max|div u| = {np.max(np.abs(d)):.3e} > {bound:.1e}")


def rhs(u: VectorField, w: VectorField, cfg: SolverConfig | None = None) -> tuple[VectorField, VectorField]:
    """Time derivatives ``(du, dw)`` of the projected system at one instant."""
    cfg = cfg or SolverConfig()
    _check_div_free(u)
    grid = u.grid
    u_hat, w_hat = fwd(u.data), fwd(w.data)
    nu, nw = explicit_hat(grid, u_hat, w_hat, cfg)
    lu, lw = linear_hat(grid, u_hat, w_hat)
    return VectorField(grid, inv(lu + nu, grid.n)), VectorField(grid, inv(lw + nw, grid.n))


# ---------------------------------------------------------------------------
# integrating factors


@dataclass(frozen=True)
class _Propagator:
    eu: np.ndarray  # scalar factor for u
    a: np.ndarray  # w transverse factor
    b: np.ndarray  # w longitudinal factor
    khat: np.ndarray  # k/|k| (zero at k = 0)

    @classmethod
    def build(cls, grid: GridSpec, dt: float) -> "_Propagator":
        k2 = grid.k_squared
        khat = grid.wavenumbers * np.sqrt(grid.inv_k_squared)
        return cls(np.exp(-k2 * dt), np.exp(-(k2 + 1.0) * dt), np.exp(-(2.0 * k2 + 1.0) * dt), khat)

    def u(self, u_hat):
        return self.eu * u_hat

    def w(self, w_hat):
        along = np.sum(self.khat * w_hat, axis=0)
        return self.a * w_hat + (self.b - self.a) * self.khat * along


def _rk2(grid, prop: _Propagator, u_hat, w_hat, dt, cfg):
    nu0, nw0 = explicit_hat(grid, u_hat, w_hat, cfg)
    us = prop.u(u_hat + dt * nu0)
    ws = prop.w(w_hat + dt * nw0)
    nu1, nw1 = explicit_hat(grid, us, ws, cfg)
    u1 = prop.u(u_hat) + 0.5 * dt * (prop.u(nu0) + nu1)
    w1 = prop.w(w_hat) + 0.5 * dt * (prop.w(nw0) + nw1)
    return leray_hat(grid, u1), w1


def step(s: State, cfg: SolverConfig, dt: float | None = None) -> State:
    """Advance one step of size ``dt`` (default ``cfg.dt`` or the CFL choice)."""
    grid = s.grid
    if dt is None:
        dt = cfg.dt if cfg.dt is not None else cfl_dt(s.u, cfg.cfl, cfg.dt_max)
    prop = _Propagator.build(grid, dt)
    with np.errstate(over="ignore", invalid="ignore"):
        u1, w1 = _rk2(grid, prop, fwd(s.u.data), fwd(s.w.data), dt, cfg)
    u_new, w_new = inv(u1, grid.n), inv(w1, grid.n)
    if not (np.all(np.isfinite(u_new)) and np.all(np.isfinite(w_new))):
        raise NumericalBlowUp(f"numerical blow-up in step from t = {s.t:.6g}", s)
    return State(VectorField(grid, u_new), VectorField(grid, w_new), s.t + dt)


# ---------------------------------------------------------------------------
# pressure


def pressure_hat(grid: GridSpec, u_hat: np.ndarray, use_dealias: bool = False) -> np.ndarray:
    """Spectrum of the mean-zero solution of ``-Lap p = div div (u x u)``."""
    u = inv(u_hat, grid.n)
    t_hat = fwd(u[:, None] * u[None, :])
    if use_dealias:
        t_hat = dealias(t_hat, grid)
    k = grid.wavenumbers
    dd = -np.einsum("ixyz,jxyz,ijxyz->xyz", k, k, t_hat)  # div div of u x u
    return dd * grid.inv_k_squared


def recover_pressure(u: VectorField) -> ScalarField:
    return ScalarField(u.grid, inv(pressure_hat(u.grid, fwd(u.data)), u.grid.n))


def pressure_residual(u: VectorField, p: ScalarField) -> float:
    """Relative L2 residual of ``Lap p + div div (u x u)``, mean mode excluded."""
    grid = u.grid
    k = grid.wavenumbers
    t_hat = fwd(u.data[:, None] * u.data[None, :])
    dd = -np.einsum("ixyz,jxyz,ijxyz->xyz", k, k, t_hat)
    res = lap_hat(grid, fwd(p.data)) + dd
    denom = math.sqrt(spectral_inner(grid, dd, dd))
    num = math.sqrt(spectral_inner(grid, res, res))
    return num / denom if denom > 0 else num


# ---------------------------------------------------------------------------
# energy bookkeeping


@dataclass
class EnergySeries:
    """Per-step global quantities; squared L2 norms throughout.

    ``energy_u`` and ``energy_w`` are the halves ``||u||^2/2`` and ``||w||^2/2``.
    """

    t: np.ndarray
    energy_u: np.ndarray
    energy_w: np.ndarray
    grad_u: np.ndarray
    grad_w: np.ndarray
    div_w: np.ndarray
    l2_w: np.ndarray
    coupling: np.ndarray  # int curl u . w

    @property
    def dissipation(self) -> np.ndarray:
        """Right-hand side of the exact global energy identity."""
        return -self.grad_u - self.grad_w - self.div_w - self.l2_w + self.coupling

    def balance_residual(self) -> np.ndarray:
        """``(E(t) - E(0) - int_0^t dE) / E(0)`` for ``E = (||u||^2 + ||w||^2)/2``."""
        e = self.energy_u + self.energy_w
        if len(self.t) < 2:
            return np.zeros_like(e)
        integral = cumulative_simpson(self.dissipation, x=self.t, initial=0.0)
        scale = e[0] if e[0] > 0 else 1.0
        return (e - e[0] - integral) / scale

    def def11_slack(self) -> np.ndarray:
        """Initial energy minus the left side of the global energy inequality."""
        e = 2.0 * (self.energy_u + self.energy_w)
        dens = self.grad_u + 2.0 * self.grad_w + self.l2_w + 2.0 * self.div_w
        if len(self.t) < 2:
            integral = np.zeros_like(e)
        else:
            integral = cumulative_simpson(dens, x=self.t, initial=0.0)
        return e[0] - (e + integral)


def energy_terms(grid: GridSpec, u_hat: np.ndarray, w_hat: np.ndarray) -> tuple[float, ...]:
    k2 = grid.k_squared
    ip = lambda a, b: spectral_inner(grid, a, b)  # noqa: E731
    d = div_hat(grid, w_hat)
    eu = 0.5 * ip(u_hat, u_hat)
    ew = 0.5 * ip(w_hat, w_hat)
    gu = ip(np.sqrt(k2) * u_hat, np.sqrt(k2) * u_hat)
    gw = ip(np.sqrt(k2) * w_hat, np.sqrt(k2) * w_hat)
    return eu, ew, gu, gw, ip(d, d), 2.0 * ew, ip(curl_hat(grid, u_hat), w_hat)


# ---------------------------------------------------------------------------
# trajectories


@dataclass
class Trajectory:
    """Recorded slices ``u[k], w[k], p[k]`` at ``times[k]``.

    Arrays are (K, 3, n, n, n) for u and w and (K, n, n, n) for p.  ``energy``
    holds per-step global norms when produced by :func:`integrate`.
    """

    grid: GridSpec
    times: np.ndarray
    u: np.ndarray
    w: np.ndarray
    p: np.ndarray | None = None
    blew_up: bool = False
    message: str = ""
    energy: EnergySeries | None = None
    config: SolverConfig | None = field(default=None, repr=False)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        k = len(self.times)
        if self.u.shape != (k, 3) + self.grid.shape or self.w.shape != self.u.shape:
            raise ValueError("trajectory arrays do not match the time axis and grid")
        if k > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("recorded times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    def pressure(self) -> np.ndarray:
        """Recorded pressure, recovering (and caching) it if absent."""
        if self.p is None:
            with np.errstate(over="ignore", invalid="ignore"):
                self.p = np.array([inv(pressure_hat(self.grid, fwd(u)), self.grid.n) for u in self.u])
        return self.p

    def state(self, k: int) -> State:
        # the pressure of a nearly blown-up slice may overflow; drop it then
        p = None if self.p is None or not np.all(np.isfinite(self.p[k])) else ScalarField(self.grid, self.p[k])
        return State(VectorField(self.grid, self.u[k]), VectorField(self.grid, self.w[k]), float(self.times[k]), p)


def integrate(initial: State, cfg: SolverConfig) -> Trajectory:
    """Integrate from ``initial`` to ``cfg.t_end`` with a fixed step.

    On a non-finite step the run stops; the returned trajectory ends at the
    last valid state and has ``blew_up`` set.
    """
    _check_div_free(initial.u)
    grid = initial.grid
    span = cfg.t_end - initial.t
    if span < 0:
        raise ValueError("t_end lies before the initial time")
    dt0 = cfg.dt if cfg.dt is not None else cfl_dt(initial.u, cfg.cfl, cfg.dt_max)
    nsteps = max(1, math.ceil(span / dt0 - 1e-9)) if span > 0 else 0
    dt = span / nsteps if nsteps else dt0
    prop = _Propagator.build(grid, dt)

    u_hat = leray_hat(grid, fwd(initial.u.data))
    w_hat = fwd(initial.w.data)
    times, us, ws = [initial.t], [inv(u_hat, grid.n)], [initial.w.data.copy()]
    steps_t = [initial.t]
    terms = [energy_terms(grid, u_hat, w_hat)]
    blew_up, message = False, ""
    for i in range(1, nsteps + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            u1, w1 = _rk2(grid, prop, u_hat, w_hat, dt, cfg)
        if not (np.all(np.isfinite(u1)) and np.all(np.isfinite(w1))):
            blew_up = True
            message = f"numerical blow-up at step {i} (t = {initial.t + i * dt:.6g})"
            break
        u_hat, w_hat = u1, w1
        t = initial.t + i * dt
        steps_t.append(t)
        with np.errstate(over="ignore", invalid="ignore"):
            terms.append(energy_terms(grid, u_hat, w_hat))
        if i % cfg.record_every == 0 or i == nsteps:
            times.append(t)
            us.append(inv(u_hat, grid.n))
            ws.append(inv(w_hat, grid.n))
    if blew_up and times[-1] != steps_t[-1]:
        times.append(steps_t[-1])
        us.append(inv(u_hat, grid.n))
        ws.append(inv(w_hat, grid.n))
    cols = np.array(terms).T
    series = EnergySeries(np.array(steps_t), *cols)
    traj = Trajectory(grid, np.array(times), np.array(us), np.array(ws), None, blew_up, message, series, cfg)
    if cfg.record_pressure:
        traj.pressure()
    return traj


# ---------------------------------------------------------------------------
# divergence of w


def divw_residual(traj: Trajectory, use_dealias: bool | None = None) -> tuple[np.ndarray, np.ndarray]:
    """L2 norm of the residual of the evolution equation for ``div w``.

    Evaluates ``d_t div w - 2 Lap div w + div w + div div (w x u)`` at interior
    recorded slices, with a centered difference in time (second order on
    uniform records).  Products use the same dealiasing as the run.
    Returns ``(times, norms)``.
    """
    if len(traj) < 3:
        raise ValueError("need at least 3 recorded slices")
    grid = traj.grid
    if use_dealias is None:
        use_dealias = traj.config.dealias if traj.config is not None else True
    k = grid.wavenumbers
    divs = [div_hat(grid, fwd(w)) for w in traj.w]
    out = []
    for j in range(1, len(traj) - 1):
        t0, t1, t2 = traj.times[j - 1 : j + 2]
        h0, h1 = t1 - t0, t2 - t1
        # three-point derivative on a possibly uneven stencil
        dt_div = (-h1 / (h0 * (h0 + h1))) * divs[j - 1] + ((h1 - h0) / (h0 * h1)) * divs[j] + (
            h0 / (h1 * (h0 + h1))
        ) * divs[j + 1]
        flux = _product(grid, traj.w[j][:, None] * traj.u[j][None, :], use_dealias)
        dd = -np.einsum("ixyz,jxyz,ijxyz->xyz", k, k, flux)
        res = dt_div - 2.0 * lap_hat(grid, divs[j]) + divs[j] + dd
        out.append(math.sqrt(spectral_inner(grid, res, res)))
    return traj.times[1:-1].copy(), np.array(out)


def with_config(cfg: SolverConfig, **changes) -> SolverConfig:
    return replace(cfg, **changes)
