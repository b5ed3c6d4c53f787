"""Periodic sampled fields and spectral differential operators on the 3-torus.

Transform convention
--------------------
Spectral coefficients are ``rfftn(f) / n**3``, so the ``k = 0`` coefficient is
the spatial mean and ``f(x) = sum_k f_hat(k) exp(i k.x)``.  Parseval then reads

    h**3 * sum |f|**2 == L**3 * sum_k |f_hat(k)|**2

where the sum over ``k`` runs over the full (conjugate-symmetric) lattice.

Only half of the last axis is stored (real-to-complex layout).  In every
derivative symbol the Nyquist wavenumber ``-n/2`` is replaced by zero: a real
field cannot carry an odd derivative of its Nyquist mode, and using one
wavenumber array everywhere keeps all operator identities exact to roundoff.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft

THREADS_ENV = "MICROPOLAR_THREADS"


def fft_workers() -> int:
    """Thread count for transforms; overridable through ``MICROPOLAR_THREADS``."""
    value = os.environ.get(THREADS_ENV)
    if value is None:
        return 1
    try:
        workers = int(value)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {value!r}") from None
    return workers if workers != 0 else 1


@dataclass(frozen=True)
class GridSpec:
    """Uniform ``n**3`` grid on the periodic box ``[0, box_length)**3``."""

    n: int
    box_length: float = 2.0 * np.pi

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 4 or self.n % 2:
            raise ValueError(f"n must be an even integer >= 4, got {self.n}")
        if not (self.box_length > 0 and np.isfinite(self.box_length)):
            raise ValueError(f"box_length must be positive, got {self.box_length}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "box_length", float(self.box_length))

    @property
    def h(self) -> float:
        return self.box_length / self.n

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n)

    @property
    def spectral_shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n // 2 + 1)

    @property
    def cell_volume(self) -> float:
        return self.h**3

    @property
    def volume(self) -> float:
        return self.box_length**3

    def coords(self) -> np.ndarray:
        """1-D sample positions ``j*h`` along any axis."""
        return np.arange(self.n) * self.h

    def mesh(self) -> np.ndarray:
        """Array of shape (3, n, n, n) holding the sample coordinates."""
        x = self.coords()
        return np.array(np.meshgrid(x, x, x, indexing="ij"))

    # Spectral tables are cached per grid; GridSpec is hashable and frozen.
    @cached_property
    def _tables(self) -> "_SpectralTables":
        return _SpectralTables.build(self)

    @property
    def wavenumbers(self) -> np.ndarray:
        """Derivative wavenumbers, shape (3, n, n, n//2+1), Nyquist set to 0."""
        return self._tables.k

    @property
    def integer_wavenumbers(self) -> np.ndarray:
        """Integer lattice indices in [-n/2, n/2), shape (3, n, n, n//2+1)."""
        return self._tables.kint

    @property
    def k_squared(self) -> np.ndarray:
        return self._tables.k2

    @property
    def inv_k_squared(self) -> np.ndarray:
        """1/|k|**2 with zero wherever |k| = 0."""
        return self._tables.inv_k2

    @property
    def dealias_mask(self) -> np.ndarray:
        return self._tables.dealias

    @property
    def parseval_weights(self) -> np.ndarray:
        """Multiplicity of each stored mode in the full conjugate-symmetric sum."""
        return self._tables.weights


@dataclass(frozen=True)
class _SpectralTables:
    k: np.ndarray
    kint: np.ndarray
    k2: np.ndarray
    inv_k2: np.ndarray
    dealias: np.ndarray
    weights: np.ndarray

    @classmethod
    def build(cls, grid: GridSpec) -> "_SpectralTables":
        n = grid.n
        full = np.fft.fftfreq(n, 1.0 / n)
        half = np.fft.rfftfreq(n, 1.0 / n)
        kint = np.array(np.meshgrid(full, full, half, indexing="ij"))
        scale = 2.0 * np.pi / grid.box_length
        kd_full = np.where(np.abs(full) == n // 2, 0.0, full) * scale
        kd_half = np.where(np.abs(half) == n // 2, 0.0, half) * scale
        k = np.array(np.meshgrid(kd_full, kd_full, kd_half, indexing="ij"))
        k2 = np.sum(k * k, axis=0)
        with np.errstate(divide="ignore"):
            inv_k2 = np.where(k2 > 0, 1.0 / np.where(k2 > 0, k2, 1.0), 0.0)
        cutoff = n / 3.0
        dealias = np.all(np.abs(kint) < cutoff, axis=0)
        weights = np.full(grid.spectral_shape, 2.0)
        weights[..., 0] = 1.0
        weights[..., -1] = 1.0
        for arr in (k, kint, k2, inv_k2, dealias, weights):
            arr.setflags(write=False)
        return cls(k, kint, k2, inv_k2, dealias, weights)


def _check_finite(data: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(data)):
        raise ValueError(f"{what} contains non-finite samples")


@dataclass
class ScalarField:
    grid: GridSpec
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.shape != self.grid.shape:
            raise ValueError(f"scalar samples must have shape {self.grid.shape}, got {self.data.shape}")
        _check_finite(self.data, "ScalarField")

    def mean(self) -> float:
        return float(self.data.mean())

    def norm_inf(self) -> float:
        return float(np.max(np.abs(self.data)))

    def norm_l2(self) -> float:
        return float(np.sqrt(self.grid.cell_volume * np.sum(self.data**2)))

    def __add__(self, other: "ScalarField") -> "ScalarField":
        return ScalarField(self.grid, self.data + other.data)

    def __sub__(self, other: "ScalarField") -> "ScalarField":
        return ScalarField(self.grid, self.data - other.data)

    def __mul__(self, c: float) -> "ScalarField":
        return ScalarField(self.grid, self.data * c)

    __rmul__ = __mul__


@dataclass
class VectorField:
    """Three real components sampled on ``grid``; ``data`` has shape (3, n, n, n)."""

    grid: GridSpec
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.shape != (3,) + self.grid.shape:
            raise ValueError(
                f"vector samples must have shape {(3,) + self.grid.shape}, got {self.data.shape}"
            )
        _check_finite(self.data, "VectorField")

    @classmethod
    def zeros(cls, grid: GridSpec) -> "VectorField":
        return cls(grid, np.zeros((3,) + grid.shape))

    def magnitude(self) -> np.ndarray:
        return np.sqrt(np.sum(self.data**2, axis=0))

    def norm_inf(self) -> float:
        return float(np.max(np.abs(self.data)))

    def norm_l2(self) -> float:
        return float(np.sqrt(self.grid.cell_volume * np.sum(self.data**2)))

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.grid, self.data + other.data)

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(self.grid, self.data - other.data)

    def __mul__(self, c: float) -> "VectorField":
        return VectorField(self.grid, self.data * c)

    __rmul__ = __mul__


@dataclass
class SpectralField:
    """Half-spectrum coefficients of one or more real fields.

    ``modes`` has shape ``(..., n, n, n//2+1)``; leading axes index components.
    Conjugate symmetry holds by construction of the real-to-complex layout.
    """

    grid: GridSpec
    modes: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.modes.shape[-3:] != self.grid.spectral_shape:
            raise ValueError(f"modes shape {self.modes.shape} does not end in {self.grid.spectral_shape}")
        if not np.all(np.isfinite(self.modes)):
            raise ValueError("spectral coefficients must be finite")

    def mode(self, k) -> np.ndarray:
        """Coefficient at integer wavevector ``k`` in [-n/2, n/2)**3."""
        n = self.grid.n
        k1, k2, k3 = (int(c) for c in k)
        for c in (k1, k2, k3):
            if not -n // 2 <= c < n // 2:
                raise IndexError(f"wavevector component {c} outside [-{n // 2}, {n // 2})")
        if k3 >= 0:
            return self.modes[..., k1 % n, k2 % n, k3]
        return np.conj(self.modes[..., (-k1) % n, (-k2) % n, -k3])


# ---------------------------------------------------------------------------
# transforms on raw arrays


def fwd(data: np.ndarray) -> np.ndarray:
    """Real samples (..., n, n, n) -> mean-normalized half spectrum."""
    n = data.shape[-1]
    return scipy.fft.rfftn(data, axes=(-3, -2, -1), workers=fft_workers()) / n**3


def inv(modes: np.ndarray, n: int) -> np.ndarray:
    """Inverse of :func:`fwd`."""
    return scipy.fft.irfftn(modes * n**3, s=(n, n, n), axes=(-3, -2, -1), workers=fft_workers())


def to_spectral(f: VectorField | ScalarField) -> SpectralField:
    return SpectralField(f.grid, fwd(f.data))


def from_spectral(s: SpectralField) -> VectorField | ScalarField:
    data = inv(s.modes, s.grid.n)
    if data.ndim == 4:
        return VectorField(s.grid, data)
    return ScalarField(s.grid, data)


def spectral_inner(grid: GridSpec, a_hat: np.ndarray, b_hat: np.ndarray) -> float:
    """L2 inner product of two real fields from their half spectra (Parseval)."""
    w = grid.parseval_weights
    prod = np.real(a_hat * np.conj(b_hat))
    if prod.ndim > 3:
        prod = prod.reshape((-1,) + prod.shape[-3:]).sum(axis=0)
    return float(grid.volume * np.sum(w * prod))


# ---------------------------------------------------------------------------
# spectral symbols on raw half spectra


def grad_hat(grid: GridSpec, s_hat: np.ndarray) -> np.ndarray:
    return 1j * grid.wavenumbers * s_hat


def div_hat(grid: GridSpec, v_hat: np.ndarray) -> np.ndarray:
    return 1j * np.sum(grid.wavenumbers * v_hat, axis=0)


def curl_hat(grid: GridSpec, v_hat: np.ndarray) -> np.ndarray:
    k = grid.wavenumbers
    return 1j * np.array(
        [
            k[1] * v_hat[2] - k[2] * v_hat[1],
            k[2] * v_hat[0] - k[0] * v_hat[2],
            k[0] * v_hat[1] - k[1] * v_hat[0],
        ]
    )


def lap_hat(grid: GridSpec, f_hat: np.ndarray) -> np.ndarray:
    return -grid.k_squared * f_hat


def grad_div_hat(grid: GridSpec, v_hat: np.ndarray) -> np.ndarray:
    k = grid.wavenumbers
    return -k * np.sum(k * v_hat, axis=0)


def leray_hat(grid: GridSpec, v_hat: np.ndarray) -> np.ndarray:
    k = grid.wavenumbers
    return v_hat - k * (np.sum(k * v_hat, axis=0) * grid.inv_k_squared)


def tensor_grad_hat(grid: GridSpec, v_hat: np.ndarray) -> np.ndarray:
    """Spectrum of the gradient tensor, entry [i, j] = d_j v_i."""
    return 1j * grid.wavenumbers[None, :] * v_hat[:, None]


# ---------------------------------------------------------------------------
# field-level operators


def divergence(f: VectorField) -> ScalarField:
    return ScalarField(f.grid, inv(div_hat(f.grid, fwd(f.data)), f.grid.n))


def curl(f: VectorField) -> VectorField:
    return VectorField(f.grid, inv(curl_hat(f.grid, fwd(f.data)), f.grid.n))


def gradient(s: ScalarField) -> VectorField:
    return VectorField(s.grid, inv(grad_hat(s.grid, fwd(s.data)), s.grid.n))


def laplacian(f: VectorField | ScalarField) -> VectorField | ScalarField:
    out = inv(lap_hat(f.grid, fwd(f.data)), f.grid.n)
    return type(f)(f.grid, out)


def grad_div(f: VectorField) -> VectorField:
    return VectorField(f.grid, inv(grad_div_hat(f.grid, fwd(f.data)), f.grid.n))


def leray_project(f: VectorField) -> VectorField:
    """Orthogonal projection onto divergence-free fields; the mean passes through."""
    return VectorField(f.grid, inv(leray_hat(f.grid, fwd(f.data)), f.grid.n))


def gradient_tensor(f: VectorField) -> np.ndarray:
    """Samples of d_j f_i, shape (3, 3, n, n, n)."""
    return inv(tensor_grad_hat(f.grid, fwd(f.data)), f.grid.n)


def dealias(f_hat: np.ndarray, grid: GridSpec) -> np.ndarray:
    """2/3-rule truncation of a half spectrum."""
    return f_hat * grid.dealias_mask


def random_field(
    grid: GridSpec,
    seed: int,
    slope: float = 4.0,
    k_peak: float = 2.0,
    k_max: float | None = None,
    amplitude: float = 1.0,
    solenoidal: bool = False,
) -> VectorField:
    """Seeded smooth random vector field.

    Mode amplitudes follow ``(|k|/k_peak)**2 / (1 + (|k|/k_peak)**(2+slope))``,
    truncated at ``k_max`` (default: the dealiasing cutoff), so spectra fall
    off like ``|k|**-slope``.  The result is rescaled to max-norm ``amplitude``.
    """
    rng = np.random.default_rng(seed)
    shape = (3,) + grid.spectral_shape
    coeffs = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    kint = grid.integer_wavenumbers
    kmag = np.sqrt(np.sum(kint.astype(float) ** 2, axis=0))
    ratio = kmag / k_peak
    envelope = ratio**2 / (1.0 + ratio ** (2.0 + slope))
    if k_max is None:
        keep = grid.dealias_mask
    else:
        keep = np.all(np.abs(kint) <= k_max, axis=0)
    coeffs = coeffs * envelope * keep
    # Nyquist planes carry no odd derivatives; keep fields clear of them.
    nyq = np.any(np.abs(kint) == grid.n // 2, axis=0)
    coeffs[:, nyq] = 0.0
    if solenoidal:
        coeffs = leray_hat(grid, coeffs)
    data = inv(coeffs, grid.n)
    peak = np.max(np.abs(data))
    if peak > 0:
        data *= amplitude / peak
    return VectorField(grid, data)
