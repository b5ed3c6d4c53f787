"""Scaling maps and residual operators for the two evolution equations.

The natural scaling ``u -> lam u(lam^2 t, lam x)``, ``p -> lam^2 p(...)``,
``w -> lam^2 w(...)`` maps the velocity equation residual to
``lam^3 Res1(lam^2 t, lam x)``.  The microrotation equation has no such
covariance: its residual picks up ``-lam^2 (lam^2 - 1) (w - curl u / 2)``
because of the zeroth-order damping and the lower-order coupling.

Time-dependent test data is represented modally (:class:`ModalTriplet`): each
retained wavevector carries a 7-vector ``(u, w, p)`` evolving as
``y(t) = expm(A t) y0``, so exact time derivatives are available.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.linalg import expm

from .grid import (
    GridSpec,
    ScalarField,
    VectorField,
    curl_hat,
    fwd,
    grad_div_hat,
    grad_hat,
    inv,
    lap_hat,
    tensor_grad_hat,
)


def _as_ratio(lam: float) -> Fraction:
    """Return ``lam`` as m or 1/m with integer m >= 1, or raise."""
    if not lam > 0:
        raise ValueError(f"scaling factor must be positive, got {lam}")
    if abs(lam - round(lam)) < 1e-12 and round(lam) >= 1:
        return Fraction(int(round(lam)), 1)
    inv_l = 1.0 / lam
    if abs(inv_l - round(inv_l)) < 1e-12:
        return Fraction(1, int(round(inv_l)))
    raise ValueError(f"scaling factor {lam} is neither an integer nor a reciprocal integer")


def rescale_space(f_data: np.ndarray, grid: GridSpec, lam: float) -> np.ndarray:
    """Samples of ``x -> f(lam x)`` on the same periodic grid.

    Mode ``k`` moves to ``lam k``.  For integer ``lam`` every shifted mode must
    stay strictly inside the representable band; for ``lam = 1/m`` every
    populated mode must be divisible by ``m``.
    """
    ratio = _as_ratio(lam)
    n = grid.n
    f_hat = fwd(f_data)
    kint = grid.integer_wavenumbers.astype(int)
    out = np.zeros_like(f_hat)
    active = np.any(np.abs(f_hat.reshape((-1,) + grid.spectral_shape)) > 1e-14 * max(1.0, np.abs(f_hat).max()), axis=0)
    idx = np.argwhere(active)
    for i1, i2, i3 in idx:
        k = kint[:, i1, i2, i3]
        if ratio.denominator == 1:
            k2 = k * ratio.numerator
        else:
            if np.any(k % ratio.denominator):
                raise ValueError(f"mode {tuple(k)} is not divisible by {ratio.denominator}; lam = {lam} incompatible")
            k2 = k // ratio.denominator
        if np.any(np.abs(k2) >= n // 2):
            raise ValueError(f"mode {tuple(k)} leaves the grid band under lam = {lam}")
        out[(Ellipsis, k2[0] % n, k2[1] % n, k2[2])] = f_hat[(Ellipsis, i1, i2, i3)]
        # keep the stored half-plane k3 = 0 conjugate-consistent
        if k2[2] == 0:
            out[(Ellipsis, (-k2[0]) % n, (-k2[1]) % n, 0)] = np.conj(f_hat[(Ellipsis, i1, i2, i3)])
    return inv(out, n)


def scale_triplet(u: VectorField, p: ScalarField, w: VectorField, lam: float):
    """Spatial part of the natural scaling at one instant.

    Returns ``(lam u(lam x), lam^2 p(lam x), lam^2 w(lam x))``; the caller
    supplies the fields at time ``lam^2 t``.
    """
    g = u.grid
    return (
        VectorField(g, lam * rescale_space(u.data, g, lam)),
        ScalarField(g, lam**2 * rescale_space(p.data, g, lam)),
        VectorField(g, lam**2 * rescale_space(w.data, g, lam)),
    )


# ---------------------------------------------------------------------------
# residual operators on single instants


def residual_u(u, p, w, du_dt) -> np.ndarray:
    """Samples of ``d_t u - Lap u + (u.grad) u + grad p - curl w / 2``."""
    g = u.grid
    u_hat, w_hat = fwd(u.data), fwd(w.data)
    gu = inv(tensor_grad_hat(g, u_hat), g.n)  # [i, j] = d_j u_i
    adv = np.einsum("jxyz,ijxyz->ixyz", u.data, gu)
    lin = inv(-lap_hat(g, u_hat) + grad_hat(g, fwd(p.data)) - 0.5 * curl_hat(g, w_hat), g.n)
    return du_dt.data + lin + adv


def residual_w(u, w, dw_dt) -> np.ndarray:
    """Samples of ``d_t w - Lap w - grad div w + w + (u.grad) w - curl u / 2``."""
    g = u.grid
    u_hat, w_hat = fwd(u.data), fwd(w.data)
    gw = inv(tensor_grad_hat(g, w_hat), g.n)
    adv = np.einsum("jxyz,ijxyz->ixyz", u.data, gw)
    lin = inv(-lap_hat(g, w_hat) - grad_div_hat(g, w_hat) - 0.5 * curl_hat(g, u_hat), g.n)
    return dw_dt.data + lin + w.data + adv


# ---------------------------------------------------------------------------
# modal time-dependent data


@dataclass
class ModalTriplet:
    """Real fields ``sum_k 2 Re(y_k(t) e^{i k.x})`` (k = 0 counted once).

    ``ks`` holds integer wavevectors, one per conjugate pair; ``y0`` the 7
    initial coefficients (u1..u3, w1..w3, p) per wavevector and ``gen`` the
    7x7 generators with ``y_k(t) = expm(gen_k t) y0_k``.
    """

    grid: GridSpec
    ks: np.ndarray
    y0: np.ndarray
    gen: np.ndarray

    def __post_init__(self):
        self.ks = np.asarray(self.ks, dtype=int).reshape(-1, 3)
        self.y0 = np.asarray(self.y0, dtype=complex).reshape(-1, 7)
        self.gen = np.asarray(self.gen, dtype=complex).reshape(-1, 7, 7)
        n = self.grid.n
        if np.any(np.abs(self.ks) >= n // 2):
            raise ValueError("wavevectors exceed the grid band")
        zero = np.all(self.ks == 0, axis=1)
        if np.any(np.abs(self.y0[zero].imag) > 0) or np.any(np.abs(self.gen[zero].imag) > 0):
            raise ValueError("the k = 0 mode must be real")

    def coefficients(self, t: float) -> np.ndarray:
        return np.array([expm(a * t) @ y for a, y in zip(self.gen, self.y0)])

    def derivative_coefficients(self, t: float) -> np.ndarray:
        return np.array([a @ (expm(a * t) @ y) for a, y in zip(self.gen, self.y0)])

    def _synth(self, coef: np.ndarray) -> np.ndarray:
        x = self.grid.mesh()
        out = np.zeros((7,) + self.grid.shape)
        for k, c in zip(self.ks, coef):
            phase = np.exp(1j * np.tensordot(k * 2 * np.pi / self.grid.box_length, x, axes=1))
            mult = 1.0 if not np.any(k) else 2.0
            out += mult * np.real(c[:, None, None, None] * phase[None])
        return out

    def fields(self, t: float):
        """``(u, p, w)`` at time ``t``."""
        d = self._synth(self.coefficients(t))
        g = self.grid
        return VectorField(g, d[:3]), ScalarField(g, d[6]), VectorField(g, d[3:6])

    def time_derivatives(self, t: float):
        d = self._synth(self.derivative_coefficients(t))
        g = self.grid
        return VectorField(g, d[:3]), ScalarField(g, d[6]), VectorField(g, d[3:6])

    def scaled(self, lam: float) -> "ModalTriplet":
        """The naturally rescaled family as a new modal triplet."""
        ratio = _as_ratio(lam)
        if ratio.denominator == 1:
            ks = self.ks * ratio.numerator
        else:
            if np.any(self.ks % ratio.denominator):
                raise ValueError(f"lam = {lam} needs every wavevector divisible by {ratio.denominator}")
            ks = self.ks // ratio.denominator
        amp = np.array([lam] * 3 + [lam**2] * 3 + [lam**2])
        # y_lam(t) = S y(lam^2 t)  =>  generator lam^2 S A S^-1
        gen = lam**2 * amp[:, None] * self.gen / amp[None, :]
        return ModalTriplet(self.grid, ks, self.y0 * amp, gen)

    def residuals(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        u, p, w = self.fields(t)
        du, _, dw = self.time_derivatives(t)
        return residual_u(u, p, w, du), residual_w(u, w, dw)


def manufactured_triplet(grid: GridSpec, seed: int = 0, kmax: int = 2, rate: float = 0.5) -> ModalTriplet:
    """Random band-limited data with wavevector components in {0, +-kmax}.

    Each mode carries a random complex generator of size ``rate``, so the
    data is genuinely time dependent but not a solution of anything.
    """
    rng = np.random.default_rng(seed)
    ks = []
    for k in itertools.product((0, kmax, -kmax), repeat=3):
        # one representative per conjugate pair
        if k == (0, 0, 0) or k > tuple(-c for c in k):
            ks.append(k)
    ks = np.array(ks)
    m = len(ks)
    y0 = rng.standard_normal((m, 7)) + 1j * rng.standard_normal((m, 7))
    gen = rate * (rng.standard_normal((m, 7, 7)) + 1j * rng.standard_normal((m, 7, 7)))
    zero = np.all(ks == 0, axis=1)
    y0[zero] = y0[zero].real
    gen[zero] = gen[zero].real
    return ModalTriplet(grid, ks, 0.3 * y0, gen)


def linear_mode_generator(grid: GridSpec, k) -> np.ndarray:
    """7x7 generator of the linearized system for one wavevector.

    Rows 0-2 are u, 3-5 are w, 6 is p (held at zero).  The curl coupling is
    included; the transport terms are absent.
    """
    kv = np.asarray(k, dtype=float) * 2 * np.pi / grid.box_length
    k2 = kv @ kv
    cross = 1j * np.array([[0, -kv[2], kv[1]], [kv[2], 0, -kv[0]], [-kv[1], kv[0], 0]])  # v -> i k x v
    a = np.zeros((7, 7), dtype=complex)
    a[:3, :3] = -k2 * np.eye(3)
    a[:3, 3:6] = 0.5 * cross
    a[3:6, 3:6] = -(k2 + 1.0) * np.eye(3) - np.outer(kv, kv)
    a[3:6, :3] = 0.5 * cross
    if k2 > 0:
        proj = np.eye(3) - np.outer(kv, kv) / k2
        a[:3, :] = proj @ a[:3, :]
    return a


def shear_solution(grid: GridSpec, seed: int = 0, modes=(2,)) -> ModalTriplet:
    """Exact solution with fields depending on x3 only and u3 = w3 = 0.

    For such fields the transport terms and the pressure vanish identically,
    so each mode follows the linear generator exactly.
    """
    rng = np.random.default_rng(seed)
    ks, y0, gen = [], [], []
    for m in modes:
        k = (0, 0, m)
        y = np.zeros(7, dtype=complex)
        y[[0, 1, 3, 4]] = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        ks.append(k)
        y0.append(y)
        gen.append(linear_mode_generator(grid, k))
    return ModalTriplet(grid, np.array(ks), np.array(y0), np.array(gen))


def _rel(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(np.max(np.abs(b)), 1e-300)
    return float(np.max(np.abs(a - b)) / scale)


def scaling_check(grid: GridSpec, seed: int = 0, lams=(2.0, 0.5), t: float = 0.3) -> dict:
    """Equivariance of the velocity residual and the predicted defect of the other one.

    Velocity: manufactured (non-solution) data; the rescaled residual is
    compared with ``lam^3 Res1(lam^2 t, lam x)``.  Microrotation: an exact
    shear solution, whose rescaled residual should equal
    ``-lam^2 (lam^2 - 1) (w - curl u / 2)(lam^2 t, lam x)`` and be far above
    the discretization floor.
    """
    out = {"n": grid.n, "seed": seed, "t": t, "lambdas": []}
    data = manufactured_triplet(grid, seed)
    exact = shear_solution(grid, seed)
    floor_u, floor_w = (float(np.max(np.abs(r))) for r in exact.residuals(t))
    for lam in lams:
        res1_scaled, _ = data.scaled(lam).residuals(t)
        res1_ref = lam**3 * rescale_space(data.residuals(lam**2 * t)[0], grid, lam)
        ex_s = exact.scaled(lam)
        _, res2_scaled = ex_s.residuals(t)
        u, _, w = exact.fields(lam**2 * t)
        defect = w.data - 0.5 * inv(curl_hat(grid, fwd(u.data)), grid.n)
        predicted = -(lam**2) * (lam**2 - 1.0) * rescale_space(defect, grid, lam)
        size2 = float(np.max(np.abs(res2_scaled)))
        out["lambdas"].append(
            {
                "lambda": lam,
                "res1_equivariance_error": _rel(res1_scaled, res1_ref),
                "res2_scaled_max": size2,
                "res2_floor": max(floor_u, floor_w),
                "res2_over_floor": size2 / max(floor_u, floor_w, 1e-300),
                "res2_prediction_error": _rel(res2_scaled, predicted),
            }
        )
    out["passed"] = all(
        row["res1_equivariance_error"] <= 1e-6 and row["res2_over_floor"] > 10.0 for row in out["lambdas"]
    )
    return out
