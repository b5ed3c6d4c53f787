import numpy as np
import pytest

from micropolar.grid import GridSpec, VectorField, fwd, inv, random_field
from micropolar.pressure import (
    fd_symbols,
    kernel,
    kernel_ratio,
    laplacian_7pt,
    local_pressure,
    min_image,
    near_field_ratio,
    radial_cutoff,
    smoothstep,
    split_pressure,
    verify_kernel_bound,
)
from micropolar.scenario import taylor_green
from micropolar.solver import pressure_residual, recover_pressure

G16 = GridSpec(16)
G32 = GridSpec(32)


def test_smoothstep_limits_and_symmetry():
    x = np.linspace(-0.5, 1.5, 41)
    s = smoothstep(x)
    assert np.all(s[x <= 0] == 0) and np.all(s[x >= 1] == 1)
    assert np.all(np.diff(s) >= 0)
    np.testing.assert_allclose(smoothstep(1 - x) + s, 1.0, atol=1e-15)


def test_cutoff_support():
    phi = radial_cutoff(G32, (0.1, 6.2, 3.0), 1.2)
    d = np.sqrt(np.sum(min_image(G32, (0.1, 6.2, 3.0)) ** 2, axis=0))
    assert np.all(phi[d <= 0.6] == 1.0)
    assert np.all(phi[d >= 1.2] == 0.0)
    with pytest.raises(ValueError):
        radial_cutoff(G32, (0, 0, 0), 1.0, inner=1.5)


def test_min_image_range():
    d = min_image(G16, (6.0, 0.1, 3.3))
    L = G16.box_length
    assert np.all(d >= -L / 2) and np.all(d < L / 2)


def test_fd_symbols_match_stencil():
    f = random_field(G16, 4).data[0]
    _, lam = fd_symbols(G16)
    direct = laplacian_7pt(f, G16.h)
    got = inv(-lam * fwd(f), G16.n)
    np.testing.assert_allclose(got, direct, atol=1e-12 * np.max(np.abs(direct)))


def test_zero_velocity_gives_zero_pressure():
    u = VectorField.zeros(G16)
    assert np.all(recover_pressure(u).data == 0)
    assert np.all(local_pressure(u).data == 0)
    sp = split_pressure(u, recover_pressure(u), (0, 0, 0), 1.0)
    assert np.all(sp.near.data == 0) and np.all(sp.far.data == 0)
    assert sp.harmonicity_error(recover_pressure(u)) == 0.0


@pytest.mark.parametrize("seed", range(5))
def test_spectral_pressure_residual(seed):
    u = random_field(G32, seed, solenoidal=True)
    assert pressure_residual(u, recover_pressure(u)) <= 1e-10


@pytest.mark.parametrize("scheme", ["spectral", "local"])
def test_degenerate_cutoff_reproduces_pressure(scheme):
    u = random_field(G32, 2, solenoidal=True)
    p = recover_pressure(u) if scheme == "spectral" else local_pressure(u)
    sp = split_pressure(u, p, (1, 2, 3), 1.2, degenerate=True, scheme=scheme)
    scale = np.max(np.abs(p.data))
    assert np.max(np.abs(sp.near.data - (p.data - p.data.mean()))) <= 1e-12 * scale
    assert np.max(np.abs(sp.far.data)) <= 1e-12 * scale


def test_local_split_on_taylor_green():
    g = GridSpec(64)
    u = taylor_green(g).u
    p = local_pressure(u)
    sp = split_pressure(u, p, (np.pi / 2, np.pi / 3, 1.0), np.pi / 4, scheme="local")
    assert sp.additivity_error(p) <= 1e-10
    assert sp.harmonicity_error(p) <= 1e-8


def test_local_split_random_field():
    g = GridSpec(32)
    u = random_field(g, 9, solenoidal=True)
    p = local_pressure(u)
    sp = split_pressure(u, p, (3, 3, 3), 1.2, scheme="local")
    assert sp.additivity_error(p) <= 1e-10
    assert sp.harmonicity_error(p) <= 1e-8


def test_spectral_split_is_only_approximately_harmonic():
    # global derivatives leak the cutoff band into the inner ball
    g = GridSpec(32)
    u = random_field(g, 9, solenoidal=True)
    p = recover_pressure(u)
    sp = split_pressure(u, p, (3, 3, 3), 1.2)
    assert sp.additivity_error(p) <= 1e-10
    assert sp.harmonicity_error(p) > 1e-8


def test_split_rejects_bad_radius():
    u = random_field(G16, 0, solenoidal=True)
    p = recover_pressure(u)
    with pytest.raises(ValueError):
        split_pressure(u, p, (0, 0, 0), 2.0)
    with pytest.raises(ValueError):
        split_pressure(u, p, (0, 0, 0), 0.0)
    with pytest.raises(ValueError):
        split_pressure(u, p, (0, 0, 0), 3 * G16.h, scheme="local")
    with pytest.raises(ValueError):
        split_pressure(u, p, (0, 0, 0), 1.0, scheme="fourier")


def test_near_field_ratio_bounded():
    ratios = []
    for seed in range(4):
        u = random_field(G32, seed, solenoidal=True)
        sp = split_pressure(u, recover_pressure(u), (1, 1, 1), 1.2)
        ratios.append(near_field_ratio(u, sp))
    assert all(0 < r < 2.0 for r in ratios)


def test_kernel_is_traceless_and_even():
    x = np.random.default_rng(1).standard_normal((50, 3))
    K = kernel(x)
    np.testing.assert_allclose(np.trace(K, axis1=-2, axis2=-1), 0, atol=1e-12 * np.abs(K).max())
    np.testing.assert_allclose(kernel(-x), K, rtol=0, atol=0)
    np.testing.assert_allclose(kernel(2 * x), K / 8, rtol=1e-14)


def test_kernel_ratio_properties():
    y = np.array([[4.0, 0.0, 0.0]])
    assert kernel_ratio(np.zeros((1, 3)), y)[0] == 0.0
    # first-order Taylor: ratio tends to |y|^4 |grad K(-y) . e|, finite as x -> 0
    e = np.array([[0.0, 1.0, 0.0]])
    vals = [kernel_ratio(s * e, y)[0] for s in (1e-2, 1e-3, 1e-4)]
    assert abs(vals[1] - vals[2]) < 1e-2 * vals[2]
    # scale invariance of the ratio: K is homogeneous of degree -3
    x = np.array([[0.3, -0.2, 0.1]])
    y = np.array([[1.5, 2.0, -0.7]])
    assert kernel_ratio(3 * x, 3 * y)[0] == pytest.approx(kernel_ratio(x, y)[0], rel=1e-12)


def test_kernel_probe():
    pr = verify_kernel_bound(0.5, samples=2000, seed=3)
    assert pr.passed
    assert 0 < pr.c_fit < 50
    # the fitted constant does not depend on r (scale invariance)
    pr2 = verify_kernel_bound(2.0, samples=2000, seed=3)
    assert pr2.c_fit == pytest.approx(pr.c_fit, rel=1e-10)
    with pytest.raises(ValueError):
        verify_kernel_bound(1.0, x=np.zeros((1, 3)), y=np.array([[2.0, 0, 0]]))
    with pytest.raises(ValueError):
        verify_kernel_bound(1.0, x=np.array([[2.5, 0, 0]]), y=np.array([[5.0, 0, 0]]))
    with pytest.raises(ValueError):
        verify_kernel_bound(-1.0)
