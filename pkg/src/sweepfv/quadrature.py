"""Quadrature rules on edges and triangles."""
from dataclasses import dataclass

import numpy as np

# 3-point Gauss-Legendre on [0, 1]
GAUSS3_WEIGHTS = np.array([5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0])
GAUSS3_NODES = 0.5 + 0.5 * np.sqrt(0.6) * np.array([-1.0, 0.0, 1.0])

# Symmetric 12-point rule exact for degree 6 (Dunavant family), weights
# normalized to sum to one. Barycentric orbit parameters refined to 20 digits.
_A1, _W1 = 0.24928674517091056992, 0.11678627572637912452
_A2, _W2 = 0.063089014491502173783, 0.050844906370206742465
_B1, _B2, _W3 = 0.053145049844817047865, 0.31035245103378425007, 0.082851075618373733175


def _dunavant6():
    bary, w = [], []
    for a, wt in ((_A1, _W1), (_A2, _W2)):
        c = 1.0 - 2.0 * a
        bary += [(a, a, c), (a, c, a), (c, a, a)]
        w += [wt] * 3
    c = 1.0 - _B1 - _B2
    for perm in ((_B1, _B2, c), (_B1, c, _B2), (_B2, _B1, c),
                 (_B2, c, _B1), (c, _B1, _B2), (c, _B2, _B1)):
        bary.append(perm)
        w.append(_W3)
    return np.array(bary), np.array(w)


TRI_BARY, TRI_WEIGHTS = _dunavant6()
TRI_DEGREE = 6


@dataclass(frozen=True)
class EdgeQuadrature:
    points: np.ndarray  # (3, 2)
    weights: np.ndarray  # (3,), sum to 1


@dataclass(frozen=True)
class TriangleQuadrature:
    points: np.ndarray  # (12, 2)
    weights: np.ndarray  # (12,), sum to 1
    degree: int = TRI_DEGREE


def edge_quadrature(p0, p1):
    """Three-point Gauss rule on the segment p0 -> p1 (weights normalized)."""
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    if np.allclose(p0, p1, rtol=0.0, atol=0.0):
        raise ValueError("zero-length edge")
    pts = p0[None, :] + GAUSS3_NODES[:, None] * (p1 - p0)[None, :]
    return EdgeQuadrature(pts, GAUSS3_WEIGHTS.copy())


def triangle_quadrature(vertices):
    """Degree-6 rule mapped onto the triangle with the given (3, 2) vertices."""
    v = np.asarray(vertices, dtype=float)
    return TriangleQuadrature(TRI_BARY @ v, TRI_WEIGHTS.copy())


def triangle_points(tri_vertices):
    """Quadrature points for a batch of triangles, shape (..., 12, 2)."""
    return np.einsum("qk,...kd->...qd", TRI_BARY, tri_vertices)
