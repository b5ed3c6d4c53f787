"""Local near/far splitting of the pressure and free-space kernel probes.

With a cutoff ``phi`` equal to 1 on ``B(x0, rho/2)`` and supported in
``B(x0, rho)``, the pressure is split as

    p - mean(p) = near + far,   near = (-Lap)^{-1} div div (phi u x u),

so that ``Lap far = -div div ((1 - phi) u x u)`` vanishes on the inner ball.

Two discretizations are offered.  ``scheme="spectral"`` uses exact Fourier
symbols; its derivatives are global, so the transition band of the cutoff
leaks into the inner ball and harmonicity holds only up to a slowly
converging spectral error.  ``scheme="local"`` uses the central-difference
symbols ``i sin(k h)/h`` and the 7-point Laplacian for the pressure solve,
the near part and the harmonicity check alike.  The cutoff is then held at 1
on ``B(x0, rho/2 + 2h)``, the reach of the stencils, and the discrete far
part is harmonic on the inner ball to roundoff.

The kernel bound is probed on the free-space kernel
``K_ij(x) = (3 x_i x_j / |x|^5 - delta_ij / |x|^3) / (4 pi)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridSpec, ScalarField, VectorField, fwd, inv, lap_hat
from .solver import pressure_hat

# cutoff profiles


def _h(x):
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)


def smoothstep(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)
    a, b = _h(x), _h(1.0 - x)
    return a / (a + b)


def min_image(grid: GridSpec, x0) -> np.ndarray:
    """Displacements ``x - x0`` folded into ``[-L/2, L/2)``, shape (3, n, n, n)."""
    L = grid.box_length
    x = grid.mesh()
    c = np.asarray(x0, dtype=float).reshape(3, 1, 1, 1)
    return np.mod(x - c + 0.5 * L, L) - 0.5 * L


SCHEMES = ("spectral", "local")


def radial_cutoff(grid: GridSpec, center, rho: float, inner: float | None = None) -> np.ndarray:
    """Smooth radial cutoff: 1 on B(center, inner), 0 outside B(center, rho).

    ``inner`` defaults to ``rho/2``.
    """
    inner = 0.5 * rho if inner is None else inner
    if not 0 < inner < rho:
        raise ValueError("inner radius must lie in (0, rho)")
    dist = np.sqrt(np.sum(min_image(grid, center) ** 2, axis=0))
    return smoothstep((rho - dist) / (rho - inner))


def _check_scheme(scheme: str) -> None:
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be one of {SCHEMES}, got {scheme!r}")


def fd_symbols(grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference first-derivative symbols and the 7-point Laplacian eigenvalues.

    Returns ``(s, lam)`` with ``D_j <-> i s_j`` and ``-Lap_h <-> lam``.
    """
    kh = grid.integer_wavenumbers * (2 * np.pi / grid.n)
    s = np.sin(kh) / grid.h
    lam = np.sum(2.0 - 2.0 * np.cos(kh), axis=0) / grid.h**2
    return s, lam


def laplacian_7pt(f: np.ndarray, h: float) -> np.ndarray:
    """Periodic 7-point Laplacian evaluated directly on samples."""
    out = -6.0 * f
    for ax in range(-3, 0):
        out = out + np.roll(f, 1, axis=ax) + np.roll(f, -1, axis=ax)
    return out / h**2


def local_pressure(u: VectorField) -> ScalarField:
    """Mean-zero pressure of the central-difference scheme, ``-Lap_h p = D_i D_j (u_i u_j)``."""
    grid = u.grid
    return ScalarField(grid, inv(_riesz_part(grid, u.data[:, None] * u.data[None, :], "local"), grid.n))


@dataclass
class PressureSplit:
    near: ScalarField
    far: ScalarField
    cutoff_center: tuple
    cutoff_radius: float
    phi: np.ndarray
    scheme: str = "spectral"

    def additivity_error(self, p: ScalarField) -> float:
        """max|near + far - (p - mean p)| relative to max(1, max|p|)."""
        target = p.data - p.data.mean()
        err = np.max(np.abs(self.near.data + self.far.data - target))
        return float(err / max(1.0, np.max(np.abs(p.data))))

    def harmonicity_error(self, p: ScalarField) -> float:
        """max|Lap far| on the inner ball, relative to max|p| (0 if p = 0)."""
        grid = self.far.grid
        if self.scheme == "local":
            lap = laplacian_7pt(self.far.data, grid.h)
        else:
            lap = inv(lap_hat(grid, fwd(self.far.data)), grid.n)
        dist = np.sqrt(np.sum(min_image(grid, self.cutoff_center) ** 2, axis=0))
        inner = dist <= 0.5 * self.cutoff_radius
        scale = np.max(np.abs(p.data))
        val = float(np.max(np.abs(lap[inner]), initial=0.0))
        return val / scale if scale > 0 else val


def split_pressure(
    u: VectorField,
    p: ScalarField,
    center,
    rho: float,
    degenerate: bool = False,
    scheme: str = "spectral",
) -> PressureSplit:
    """Split ``p`` into the cutoff Riesz part and its harmonic remainder.

    ``p`` should be the pressure of the same scheme (:func:`recover_pressure`
    for "spectral", :func:`local_pressure` for "local").
    ``degenerate=True`` replaces the cutoff by ``phi = 1`` everywhere, which
    collapses ``near`` onto the pressure of the scheme.
    """
    _check_scheme(scheme)
    grid = u.grid
    if not 0 < rho < grid.box_length / 4:
        raise ValueError(f"cutoff radius must lie in (0, L/4) = (0, {grid.box_length / 4:.6g}), got {rho}")
    center = tuple(float(c) for c in np.asarray(center, dtype=float).reshape(3))
    inner = 0.5 * rho
    if scheme == "local":
        inner += 2.0 * grid.h
        if inner >= rho:
            raise ValueError(f"rho = {rho} too small for the local scheme (needs rho > 4h = {4 * grid.h:.6g})")
    phi = np.ones(grid.shape) if degenerate else radial_cutoff(grid, center, rho, inner)
    near_hat = _riesz_part(grid, phi[None, None] * u.data[:, None] * u.data[None, :], scheme)
    near = inv(near_hat, grid.n)
    far = p.data - p.data.mean() - near
    return PressureSplit(ScalarField(grid, near), ScalarField(grid, far), center, float(rho), phi, scheme)


def _riesz_part(grid: GridSpec, tensor: np.ndarray, scheme: str = "spectral") -> np.ndarray:
    t_hat = fwd(tensor)
    if scheme == "local":
        s, lam = fd_symbols(grid)
        with np.errstate(divide="ignore", invalid="ignore"):
            inv_lam = np.where(lam > 0, 1.0 / np.where(lam > 0, lam, 1.0), 0.0)
        return -np.einsum("ixyz,jxyz,ijxyz->xyz", s, s, t_hat) * inv_lam
    k = grid.wavenumbers
    return -np.einsum("ixyz,jxyz,ijxyz->xyz", k, k, t_hat) * grid.inv_k_squared


def near_field_ratio(u: VectorField, split: PressureSplit) -> float:
    """``||near||_{3/2} / ||phi |u|^2||_{3/2}`` (Calderon-Zygmund ratio)."""
    grid = u.grid
    num = np.sum(np.abs(split.near.data) ** 1.5) ** (2 / 3)
    den = np.sum((split.phi * np.sum(u.data**2, axis=0)) ** 1.5) ** (2 / 3)
    return float(num / den) if den > 0 else 0.0


# ---------------------------------------------------------------------------
# free-space kernel


def kernel(x: np.ndarray) -> np.ndarray:
    """Kernel of ``(-Lap)^{-1} div div`` away from 0; ``x`` has shape (..., 3)."""
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1)
    r = np.sqrt(r2)
    outer = x[..., :, None] * x[..., None, :]
    eye = np.eye(3)
    return (3.0 * outer / r[..., None, None] ** 5 - eye / r[..., None, None] ** 3) / (4.0 * np.pi)


@dataclass
class KernelProbe:
    r: float
    x: np.ndarray
    y: np.ndarray
    ratios: np.ndarray
    c_fit: float
    c_bound: float

    @property
    def passed(self) -> bool:
        return bool(self.c_fit <= self.c_bound)


def kernel_ratio(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``|K(x - y) - K(-y)| |y|^4 / |x|`` with the Frobenius norm (0 where x = 0)."""
    diff = kernel(x - y) - kernel(-y)
    num = np.sqrt(np.sum(diff**2, axis=(-2, -1)))
    nx = np.linalg.norm(x, axis=-1)
    ny = np.linalg.norm(y, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(nx > 0, num * ny**4 / np.where(nx > 0, nx, 1.0), 0.0)
    return out


def verify_kernel_bound(
    r: float,
    samples: int = 1000,
    seed: int = 0,
    c_bound: float = 50.0,
    y_max_factor: float = 30.0,
    x: np.ndarray | None = None,
    y: np.ndarray | None = None,
) -> KernelProbe:
    """Sample ``x`` in B(0, 2r), ``y`` outside B(0, 3r) and fit the constant C_K."""
    if not r > 0:
        raise ValueError("r must be positive")
    if x is None or y is None:
        if samples < 100:
            raise ValueError("need at least 100 samples")
        rng = np.random.default_rng(seed)
        dirs = rng.standard_normal((2, samples, 3))
        dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
        x = dirs[0] * (2.0 * r * rng.random(samples) ** (1 / 3))[:, None]
        # log-uniform radii beyond 3r
        ry = 3.0 * r * np.exp(np.log(y_max_factor) * rng.random(samples)) * (1.0 + 1e-9)
        y = dirs[1] * ry[:, None]
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if len(x) != len(y):
        raise ValueError("x and y sample counts differ")
    if np.any(np.linalg.norm(x, axis=-1) >= 2 * r):
        raise ValueError("x samples must lie in B(0, 2r)")
    if np.any(np.linalg.norm(y, axis=-1) <= 3 * r):
        raise ValueError("y samples must satisfy |y| > 3r")
    ratios = kernel_ratio(x, y)
    return KernelProbe(float(r), x, y, ratios, float(ratios.max()), float(c_bound))
