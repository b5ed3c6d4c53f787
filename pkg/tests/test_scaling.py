import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from micropolar.grid import GridSpec, ScalarField, VectorField, random_field
from micropolar.scaling import (
    manufactured_triplet,
    rescale_space,
    scale_triplet,
    scaling_check,
    shear_solution,
)

G32 = GridSpec(32)


def test_identity_scaling():
    u = random_field(G32, 1, k_max=4)
    p = ScalarField(G32, u.data[0])
    w = random_field(G32, 2, k_max=4)
    us, ps, ws = scale_triplet(u, p, w, 1.0)
    np.testing.assert_allclose(us.data, u.data, atol=1e-14)
    np.testing.assert_allclose(ps.data, p.data, atol=1e-14)
    np.testing.assert_allclose(ws.data, w.data, atol=1e-14)


def test_rescale_matches_point_evaluation():
    x1, x2, x3 = G32.mesh()
    f = np.sin(2 * x1) * np.cos(4 * x2 + x3)
    np.testing.assert_allclose(rescale_space(f, G32, 2), np.sin(4 * x1) * np.cos(8 * x2 + 2 * x3), atol=1e-13)
    np.testing.assert_allclose(rescale_space(np.sin(2 * x1) * np.cos(4 * x2), G32, 0.5),
                               np.sin(x1) * np.cos(2 * x2), atol=1e-13)


@pytest.mark.parametrize("lam", [1.5, -2.0, 0.0, 0.3])
def test_incompatible_lambda_rejected(lam):
    with pytest.raises(ValueError):
        rescale_space(np.zeros(G32.shape), G32, lam)


def test_out_of_band_and_indivisible_rejected():
    x1 = G32.mesh()[0]
    with pytest.raises(ValueError):
        rescale_space(np.sin(9 * x1), G32, 2)
    with pytest.raises(ValueError):
        rescale_space(np.sin(3 * x1), G32, 0.5)


def test_modal_time_derivative_against_difference_quotient():
    data = manufactured_triplet(G32, 3)
    t, h = 0.2, 1e-5
    du, dp, dw = data.time_derivatives(t)
    up, pp, wp = data.fields(t + h)
    um, pm, wm = data.fields(t - h)
    np.testing.assert_allclose(du.data, (up.data - um.data) / (2 * h), atol=1e-7)
    np.testing.assert_allclose(dw.data, (wp.data - wm.data) / (2 * h), atol=1e-7)


def test_shear_solution_is_exact():
    r1, r2 = shear_solution(G32, 4).residuals(0.4)
    assert np.max(np.abs(r1)) < 1e-12 and np.max(np.abs(r2)) < 1e-12


@settings(max_examples=5)
@given(st.integers(0, 10**6))
def test_velocity_residual_equivariance(seed):
    rep = scaling_check(G32, seed, lams=(2.0, 0.5))
    for row in rep["lambdas"]:
        assert row["res1_equivariance_error"] <= 1e-8


def test_microrotation_residual_defect():
    rep = scaling_check(G32, 0)
    for row in rep["lambdas"]:
        # the rescaled exact solution leaves exactly the predicted lower-order defect
        assert row["res2_prediction_error"] <= 1e-10
        assert row["res2_over_floor"] > 10.0
    assert rep["passed"]


def test_scale_triplet_amplitudes():
    x3 = G32.mesh()[2]
    z = 0 * x3
    u = VectorField(G32, np.array([np.sin(x3), z, z]))
    p = ScalarField(G32, np.cos(x3))
    us, ps, ws = scale_triplet(u, p, u, 2)
    np.testing.assert_allclose(us.data[0], 2 * np.sin(2 * x3), atol=1e-13)
    np.testing.assert_allclose(ps.data, 4 * np.cos(2 * x3), atol=1e-13)
    np.testing.assert_allclose(ws.data[0], 4 * np.sin(2 * x3), atol=1e-13)
