import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sweepfv.weno import WenoConfig, combine, nonlinear_weights, reconstruct_cell, reconstruct_point

CFG = WenoConfig()
betas = st.lists(st.floats(0, 1e3, allow_nan=False), min_size=5, max_size=5)


def test_config_validation():
    with pytest.raises(ValueError):
        WenoConfig(linear_weights=(0.5, 0.5, 0.0, 0.0, 0.0))
    with pytest.raises(ValueError):
        WenoConfig(linear_weights=(0.9, 0.01, 0.01, 0.01, 0.01))
    with pytest.raises(ValueError):
        WenoConfig(eps=0.0)


@settings(max_examples=200, deadline=None)
@given(betas)
def test_weights_partition_unity(beta):
    w = nonlinear_weights(CFG, beta)
    assert w.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.all(w > 0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 1e3, allow_nan=False))
def test_equal_indicators_recover_linear_weights(b):
    w = nonlinear_weights(CFG, [b] * 5)
    assert np.allclose(w, CFG.linear_weights, rtol=0, atol=1e-15)


def test_hand_computed_weights():
    """tau = (mean |b1 - bm|)^2 with b = (1, 0, 0, 0, 2): mean = 1, tau = 1."""
    beta = np.array([1.0, 0.0, 0.0, 0.0, 2.0])
    g = np.array(CFG.linear_weights)
    wbar = g * (1 + 1.0 / (1e-6 + beta))
    assert np.allclose(nonlinear_weights(CFG, beta), wbar / wbar.sum(), rtol=1e-14)


def test_discontinuity_moves_weight_off_big_stencil():
    w = nonlinear_weights(CFG, [50.0, 1e-8, 1e-8, 1e-8, 40.0])
    assert w[0] < 1e-3 and w[1:4].sum() > 0.99


def test_dropped_stencils_ignored():
    g = np.array([0.96, 0.02, 0.02, 0.0, 0.0])
    w = nonlinear_weights(CFG, [1.0, 1.0, 1.0, 500.0, 700.0], g)
    assert np.allclose(w, g, atol=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=5, max_size=5), betas)
def test_combine_reproduces_common_value(v, beta):
    """When all polynomials agree, the blend returns that value."""
    w = nonlinear_weights(CFG, beta)
    assert combine([v[0]] * 5, w, CFG.linear_weights) == pytest.approx(v[0], rel=1e-12, abs=1e-12)


def test_linear_weights_give_big_stencil_value():
    vals = np.array([3.0, -1.0, 7.0, 2.0, 0.5])
    g = np.array(CFG.linear_weights)
    assert combine(vals, g, g) == pytest.approx(3.0, rel=1e-14)


def test_kernel_matches_reference_path(square, disc_nosource, rng):
    """Packed numba kernel against explicit polynomials with quadrature indicators."""
    d = disc_nosource
    W = d.extend(d.initial_field())
    W = W * (1 + 0.05 * rng.normal(size=W.shape))
    op = d.operator
    pts = square.edge_points.reshape(square.n_cells, 9, 2)
    out = np.empty((9, 4))
    for i in (0, 13, 40, 57):
        reconstruct_cell(i, W, *d.ops[:5], d.ops[5], CFG.eps, 0, 9, out)
        for q in (0, 4, 8):
            ref = reconstruct_point(CFG, op, i, W, pts[i, q], square.vertices[i])
            assert np.allclose(out[q], ref, rtol=1e-10, atol=1e-12)
