import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from micropolar.grid import (
    GridSpec,
    ScalarField,
    SpectralField,
    VectorField,
    curl,
    divergence,
    fwd,
    from_spectral,
    grad_div,
    gradient,
    inv,
    laplacian,
    leray_project,
    random_field,
    spectral_inner,
    to_spectral,
)

G16 = GridSpec(16)
seeds = st.integers(0, 2**31 - 1)


def test_gridspec_validation():
    with pytest.raises(ValueError):
        GridSpec(5)
    with pytest.raises(ValueError):
        GridSpec(2)
    with pytest.raises(ValueError):
        GridSpec(8, -1.0)
    g = GridSpec(8, 4.0)
    assert g.h == 0.5
    assert g.shape == (8, 8, 8)


def test_nonfinite_rejected():
    data = np.zeros((3,) + G16.shape)
    data[0, 1, 2, 3] = np.nan
    with pytest.raises(ValueError):
        VectorField(G16, data)
    with pytest.raises(ValueError):
        ScalarField(G16, np.full(G16.shape, np.inf))


def test_zero_roundtrip():
    f = VectorField.zeros(G16)
    s = to_spectral(f)
    assert np.all(s.modes == 0)
    assert np.all(from_spectral(s).data == 0)


def test_single_mode_values():
    x1 = G16.mesh()[0]
    f = VectorField(G16, np.array([np.sin(x1), 0 * x1, 0 * x1]))
    s = to_spectral(f)
    nz = np.argwhere(np.abs(s.modes[0]) > 1e-14)
    # half spectrum stores k = (1,0,0) and (-1,0,0) in the k3 = 0 plane
    assert len(nz) == 2
    np.testing.assert_allclose(s.mode((1, 0, 0))[0], -0.5j, atol=1e-15)
    np.testing.assert_allclose(s.mode((-1, 0, 0))[0], 0.5j, atol=1e-15)


def test_mode_zero_is_mean():
    f = random_field(G16, 3)
    s = to_spectral(f)
    np.testing.assert_allclose(s.mode((0, 0, 0)).real, f.data.mean(axis=(1, 2, 3)), atol=1e-15)


@given(seeds)
def test_conjugate_symmetry(seed):
    s = to_spectral(random_field(G16, seed))
    rng = np.random.default_rng(seed)
    for _ in range(5):
        k = tuple(int(v) for v in rng.integers(-7, 8, 3))
        mk = tuple(-v for v in k)
        np.testing.assert_allclose(s.mode(mk), np.conj(s.mode(k)), atol=1e-15)


@given(seeds)
def test_roundtrip_and_parseval(seed):
    f = random_field(G16, seed)
    back = from_spectral(to_spectral(f)).data
    assert np.max(np.abs(back - f.data)) <= 1e-12 * np.max(np.abs(f.data))
    phys = G16.cell_volume * np.sum(f.data**2)
    spec = spectral_inner(G16, fwd(f.data), fwd(f.data))
    assert abs(phys - spec) <= 1e-12 * phys


def test_divergence_closed_forms():
    x1, x2, _ = G16.mesh()
    z = 0 * x1
    assert np.max(np.abs(divergence(VectorField(G16, np.array([np.sin(x2), z, z]))).data)) < 1e-14
    d = divergence(VectorField(G16, np.array([np.sin(x1), z, z]))).data
    np.testing.assert_allclose(d, np.cos(x1), atol=1e-13)
    assert abs(d[0, 0, 0] - 1.0) < 1e-13
    # div grad phi = Lap phi = -2 phi for phi = sin x1 sin x2
    phi = ScalarField(G16, np.sin(x1) * np.sin(x2))
    np.testing.assert_allclose(divergence(gradient(phi)).data, -2 * phi.data, atol=1e-12)


def test_curl_closed_form():
    x1 = G16.mesh()[0]
    z = 0 * x1
    c = curl(VectorField(G16, np.array([z, z, np.sin(x1)]))).data
    np.testing.assert_allclose(c, np.array([z, -np.cos(x1), z]), atol=1e-13)
    np.testing.assert_allclose(c[:, 0, 0, 0], [0, -1, 0], atol=1e-13)


def test_laplacian_closed_form():
    x1 = G16.mesh()[0]
    z = 0 * x1
    f = VectorField(G16, np.array([np.sin(x1), z, z]))
    np.testing.assert_allclose(laplacian(f).data, -f.data, atol=1e-13)


@given(seeds)
def test_operator_identities(seed):
    f = random_field(G16, seed)
    scale = max(1.0, np.max(np.abs(f.data)))
    s = ScalarField(G16, f.data[0])
    assert np.max(np.abs(divergence(curl(f)).data)) <= 1e-12 * scale
    assert np.max(np.abs(curl(gradient(s)).data)) <= 1e-12 * scale
    ident = laplacian(f).data - grad_div(f).data + curl(curl(f)).data
    assert np.max(np.abs(ident)) <= 1e-12 * scale * 100  # second derivatives of modes up to k ~ 5


@given(seeds)
def test_leray_properties(seed):
    f = random_field(G16, seed)
    pf = leray_project(f)
    scale = max(1.0, np.max(np.abs(f.data)))
    assert np.max(np.abs(divergence(pf).data)) <= 1e-12 * scale
    assert np.max(np.abs(leray_project(pf).data - pf.data)) <= 1e-12 * scale
    # mean passes through
    np.testing.assert_allclose(pf.data.mean(axis=(1, 2, 3)), f.data.mean(axis=(1, 2, 3)), atol=1e-14)


def test_leray_gradient_and_fixed_point():
    x1, x2, _ = G16.mesh()
    phi = ScalarField(G16, np.sin(x1) * np.sin(x2))
    assert np.max(np.abs(leray_project(gradient(phi)).data)) < 1e-13
    u = random_field(G16, 1, solenoidal=True)
    assert np.max(np.abs(leray_project(u).data - u.data)) <= 1e-12


def test_leray_modewise_oracle():
    """Independent 3x3 projection per wavevector against the vectorized operator."""
    x1, x2, x3 = G16.mesh()
    f = VectorField(G16, np.array([np.sin(x1 + 2 * x2), np.cos(x3 - x1), np.sin(x1) * np.cos(x2)]))
    out = leray_project(f).data
    s = to_spectral(f)
    ref = np.zeros_like(out)
    for k in np.ndindex(16, 16, 16):
        kv = np.array([(c + 8) % 16 - 8 for c in k], dtype=float)
        m = s.mode(kv.astype(int))
        if np.any(np.abs(m) > 0):
            proj = np.eye(3) - (np.outer(kv, kv) / (kv @ kv) if kv @ kv > 0 else 0.0)
            phase = np.exp(1j * np.tensordot(kv, G16.mesh(), axes=1))
            ref += np.real((proj @ m)[:, None, None, None] * phase[None])
    np.testing.assert_allclose(out, ref, atol=1e-12)


def test_spectral_field_shape_checked():
    with pytest.raises(ValueError):
        SpectralField(G16, np.zeros((3, 4, 4, 4), dtype=complex))


def test_inverse_is_real():
    m = fwd(random_field(G16, 5).data)
    assert inv(m, 16).dtype == np.float64
