import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sweepfv.mesh import (BoundaryTag, DegenerateCellError, Mesh, MeshError, MeshIndexError,
                          MeshParseError, NonManifoldError, cell_geometry, dump_mesh, load_mesh,
                          refine_uniform)

SQUARE_2 = """\
# unit square split along its diagonal
4 2 4
0 0
1 0
1 1
0 1
0 1 2
0 2 3
0 1 EXACT
1 2 EXACT
2 3 EXACT
0 3 EXACT
"""


def test_parse_two_cells():
    m = load_mesh(SQUARE_2)
    assert m.n_cells == 2 and m.n_nodes == 4
    assert np.allclose(m.areas, 0.5)
    assert m.neighbors.tolist().count([-1, -1, -1]) == 0
    assert (m.neighbors >= 0).sum() == 2
    assert m.bbox == (0.0, 1.0, 0.0, 1.0)


def test_clockwise_cells_are_flipped():
    text = SQUARE_2.replace("0 1 2\n0 2 3", "0 2 1\n0 3 2")
    m = load_mesh(text)
    assert np.all(m.areas > 0)


def test_roundtrip(square):
    again = load_mesh(dump_mesh(square))
    assert np.array_equal(again.nodes, square.nodes)
    assert np.array_equal(again.cells, square.cells)
    assert again.boundary == square.boundary


@pytest.mark.parametrize("text,err", [
    ("", MeshParseError),
    ("4 2\n", MeshParseError),
    ("4 2 4\n0 0\n1 0\n", MeshParseError),
    (SQUARE_2.replace("0 3 EXACT", "0 3 NOPE"), MeshParseError),
    (SQUARE_2.replace("0 2 3\n", "0 2 7\n"), MeshIndexError),
    (SQUARE_2.replace("0 3 EXACT\n", "0 2 EXACT\n"), MeshError),
    (SQUARE_2 + "extra line\n", MeshParseError),
])
def test_malformed_meshes(text, err):
    with pytest.raises(err):
        load_mesh(text)


def test_untagged_boundary_edge():
    text = SQUARE_2.replace("4 2 4", "4 2 3").replace("0 3 EXACT\n", "")
    with pytest.raises(MeshError, match="no tag"):
        load_mesh(text)


def test_degenerate_cell():
    with pytest.raises(DegenerateCellError):
        Mesh([[0, 0], [1, 0], [2, 0]], [[0, 1, 2]], {(0, 1): 5, (1, 2): 5, (0, 2): 5})


def test_non_manifold_edge():
    nodes = [[0, 0], [1, 0], [0, 1], [0, -1], [1, 1]]
    with pytest.raises(NonManifoldError):
        Mesh(nodes, [[0, 1, 2], [0, 3, 1], [0, 1, 4]], {})


def test_square_mesh_geometry(square):
    assert square.n_cells == 58
    assert square.areas.sum() == pytest.approx((2 * np.pi) ** 2, rel=1e-13)
    assert np.all(square.edge_tags[square.neighbors < 0] == BoundaryTag.EXACT)
    assert np.allclose(np.linalg.norm(square.normals, axis=-1), 1.0)
    # closed polygon: sum of |e| n vanishes on each cell
    closure = np.einsum("ik,ikd->id", square.edge_lengths, square.normals)
    assert np.abs(closure).max() < 1e-13


def test_normals_point_outward(square):
    mids = 0.5 * (square.vertices + np.roll(square.vertices, -1, axis=1))
    out = mids - square.centroids[:, None, :]
    assert np.all(np.einsum("ikd,ikd->ik", out, square.normals) > 0)


def test_neighbor_symmetry(square):
    nb, ne = square.neighbors, square.neighbor_edge
    for i, k in zip(*np.nonzero(nb >= 0)):
        assert nb[nb[i, k], ne[i, k]] == i
        assert np.allclose(square.normals[i, k], -square.normals[nb[i, k], ne[i, k]])


def test_cell_geometry_matches_arrays(square):
    g = cell_geometry(square, 5)
    assert g.area == square.areas[5]
    assert np.allclose(g.centroid, square.vertices[5].mean(axis=0))


def test_cell_average_of_linear_is_centroid_value(square):
    avg = square.cell_average(lambda x, y: 3 * x - 2 * y + 1)
    c = square.centroids
    assert np.allclose(avg, 3 * c[:, 0] - 2 * c[:, 1] + 1, atol=1e-13)


def test_cell_average_of_quadratic(square):
    # mean of x^2 over a triangle: (sum x_k^2 + (sum x_k)^2) / 12
    avg = square.cell_average(lambda x, y: x * x)
    x = square.vertices[..., 0]
    assert np.allclose(avg, ((x ** 2).sum(1) + x.sum(1) ** 2) / 12, atol=1e-12)


def test_refine_uniform(square):
    fine = refine_uniform(square)
    assert fine.n_cells == 4 * square.n_cells
    assert fine.areas.sum() == pytest.approx(square.areas.sum(), rel=1e-13)
    children = fine.areas.reshape(-1, 4)
    assert np.allclose(children, square.areas[:, None] / 4, rtol=1e-12)
    # Euler characteristic of a disc
    n_edges = (3 * fine.n_cells + len(fine.boundary)) // 2
    assert fine.n_nodes - n_edges + fine.n_cells == 1
    assert len(fine.boundary) == 2 * len(square.boundary)
    assert set(fine.boundary.values()) == set(square.boundary.values())


def test_refine_keeps_tags_per_side(shock_mesh):
    fine = refine_uniform(shock_mesh)
    for tag in BoundaryTag:
        assert sum(t == tag for t in fine.boundary.values()) == \
            2 * sum(t == tag for t in shock_mesh.boundary.values())


def test_shock_mesh_tags(shock_mesh):
    assert shock_mesh.bbox == (0.0, 4.0, 0.0, 1.0)
    for (a, b), tag in shock_mesh.boundary.items():
        pa, pb = shock_mesh.nodes[a], shock_mesh.nodes[b]
        if tag == BoundaryTag.WALL:
            assert pa[1] == pb[1] == 0.0
        elif tag == BoundaryTag.OUTFLOW:
            assert pa[0] == pb[0] == 4.0
        elif tag == BoundaryTag.DIRICHLET_TOP:
            assert pa[1] == pb[1] == 1.0
        else:
            assert tag == BoundaryTag.DIRICHLET_LEFT and pa[0] == pb[0] == 0.0


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.floats(0.1, 3), st.floats(0.1, 3)), min_size=1, max_size=1),
       st.floats(0, 2 * np.pi))
def test_single_triangle_invariants(scale, angle):
    sx, sy = scale[0]
    c, s = np.cos(angle), np.sin(angle)
    pts = np.array([[0, 0], [sx, 0], [0, sy]]) @ np.array([[c, s], [-s, c]])
    m = Mesh(pts, [[0, 1, 2]], {(0, 1): 5, (1, 2): 5, (0, 2): 5})
    assert m.areas[0] == pytest.approx(0.5 * sx * sy, rel=1e-12)
    closure = np.einsum("k,kd->d", m.edge_lengths[0], m.normals[0])
    assert np.abs(closure).max() < 1e-12 * (sx + sy)
