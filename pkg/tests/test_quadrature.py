from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sweepfv.quadrature import (GAUSS3_NODES, GAUSS3_WEIGHTS, TRI_BARY, TRI_DEGREE,
                                TRI_WEIGHTS, edge_quadrature, triangle_quadrature)


def reference_monomial_integral(a, b):
    """Integral of x^a y^b over the unit right triangle (Dirichlet formula)."""
    return factorial(a) * factorial(b) / factorial(a + b + 2)


def test_weights_are_normalized():
    assert GAUSS3_WEIGHTS.sum() == pytest.approx(1.0, abs=1e-15)
    assert TRI_WEIGHTS.sum() == pytest.approx(1.0, abs=1e-15)
    assert np.all(TRI_WEIGHTS > 0)
    assert np.allclose(TRI_BARY.sum(axis=1), 1.0, atol=1e-15)
    assert np.all(TRI_BARY >= 0)


@pytest.mark.parametrize("p", range(6))
def test_gauss3_exact_to_degree_5(p):
    assert np.dot(GAUSS3_WEIGHTS, GAUSS3_NODES ** p) == pytest.approx(1.0 / (p + 1), rel=1e-14)


def test_gauss3_not_exact_at_degree_6():
    assert abs(np.dot(GAUSS3_WEIGHTS, GAUSS3_NODES ** 6) - 1.0 / 7.0) > 1e-6


@pytest.mark.parametrize("a,b", [(a, d - a) for d in range(TRI_DEGREE + 1) for a in range(d + 1)])
def test_triangle_rule_exact_to_degree_6(a, b):
    q = triangle_quadrature(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
    got = 0.5 * np.dot(q.weights, q.points[:, 0] ** a * q.points[:, 1] ** b)
    assert got == pytest.approx(reference_monomial_integral(a, b), rel=1e-13, abs=1e-16)


def test_triangle_rule_not_exact_at_degree_8():
    q = triangle_quadrature(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
    got = 0.5 * np.dot(q.weights, q.points[:, 0] ** 8)
    assert abs(got - reference_monomial_integral(8, 0)) > 1e-9


coord = st.floats(-5, 5, allow_nan=False)


@settings(max_examples=40, deadline=None)
@given(x0=coord, y0=coord, x1=coord, y1=coord, c=st.lists(st.floats(-2, 2), min_size=6, max_size=6))
def test_edge_rule_integrates_quintics(x0, y0, x1, y1, c):
    length = np.hypot(x1 - x0, y1 - y0)
    if length < 1e-3:
        return
    q = edge_quadrature((x0, y0), (x1, y1))
    # quintic in the arc parameter, integrated exactly by the antiderivative
    t = (q.points[:, 0] - x0) * (x1 - x0) + (q.points[:, 1] - y0) * (y1 - y0)
    t = t / length ** 2
    vals = sum(ck * t ** k for k, ck in enumerate(c))
    exact = sum(ck / (k + 1) for k, ck in enumerate(c))
    assert np.dot(q.weights, vals) == pytest.approx(exact, rel=1e-12, abs=1e-12)


def test_zero_length_edge_rejected():
    with pytest.raises(ValueError):
        edge_quadrature((1.0, 1.0), (1.0, 1.0))


@settings(max_examples=30, deadline=None)
@given(pts=st.lists(st.tuples(coord, coord), min_size=3, max_size=3))
def test_affine_invariance_of_triangle_rule(pts):
    v = np.array(pts)
    area = 0.5 * abs((v[1, 0] - v[0, 0]) * (v[2, 1] - v[0, 1]) - (v[1, 1] - v[0, 1]) * (v[2, 0] - v[0, 0]))
    if area < 1e-2:
        return
    q = triangle_quadrature(v)
    # the mean of x over a triangle is the centroid x
    assert np.dot(q.weights, q.points[:, 0]) == pytest.approx(v[:, 0].mean(), abs=1e-12)
    # second moment of x: (x1^2 + x2^2 + x3^2 + (x1 + x2 + x3)^2) / 12
    x = v[:, 0]
    assert np.dot(q.weights, q.points[:, 0] ** 2) == pytest.approx(
        (np.sum(x ** 2) + x.sum() ** 2) / 12, rel=1e-12, abs=1e-12)
