"""Triangular meshes: file I/O, edge topology, geometry and uniform refinement.

Cell ``i`` has vertices ``cells[i]`` in counter-clockwise order; its local
edge ``k`` joins vertices ``k`` and ``(k + 1) % 3``.
"""
from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property

import numpy as np

from .quadrature import GAUSS3_NODES, TRI_BARY, TRI_WEIGHTS


class BoundaryTag(IntEnum):
    DIRICHLET_LEFT = 1
    DIRICHLET_TOP = 2
    WALL = 3
    OUTFLOW = 4
    EXACT = 5


class MeshError(ValueError):
    pass


class MeshParseError(MeshError):
    pass


class MeshIndexError(MeshError):
    pass


class NonManifoldError(MeshError):
    pass


class DegenerateCellError(MeshError):
    pass


@dataclass(frozen=True)
class CellGeometry:
    area: float
    centroid: np.ndarray
    edge_lengths: np.ndarray  # (3,)
    normals: np.ndarray  # (3, 2) outward unit normals


def _signed_area(p):
    """Signed area of triangles given as (..., 3, 2)."""
    a = p[..., 1, :] - p[..., 0, :]
    b = p[..., 2, :] - p[..., 0, :]
    return 0.5 * (a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0])


def build_topology(cells):
    """Edge neighbours by hashing sorted node pairs.

    Returns ``(neighbors, neighbor_edge)``, both (M, 3) int arrays; -1 marks
    edges with no cell on the other side.
    """
    m = len(cells)
    neighbors = np.full((m, 3), -1, dtype=np.int64)
    neighbor_edge = np.full((m, 3), -1, dtype=np.int64)
    seen = {}
    for i in range(m):
        for k in range(3):
            a, b = int(cells[i, k]), int(cells[i, (k + 1) % 3])
            key = (a, b) if a < b else (b, a)
            other = seen.get(key)
            if other is None:
                seen[key] = (i, k)
                continue
            j, kk = other
            if j < 0 or neighbors[j, kk] >= 0:
                raise NonManifoldError(f"edge {key} is shared by more than two cells")
            if j == i:
                raise NonManifoldError(f"cell {i} uses edge {key} twice")
            neighbors[i, k], neighbor_edge[i, k] = j, kk
            neighbors[j, kk], neighbor_edge[j, kk] = i, k
            seen[key] = (-1, -1)
    return neighbors, neighbor_edge


class Mesh:
    """Immutable triangulation with boundary tags on edges.

    ``boundary`` maps a sorted node pair to a :class:`BoundaryTag`; every edge
    that has a single incident cell must appear in it.
    """

    def __init__(self, nodes, cells, boundary):
        nodes = np.array(nodes, dtype=float).reshape(-1, 2)
        cells = np.array(cells, dtype=np.int64).reshape(-1, 3)
        nv = len(nodes)
        if cells.size and (cells.min() < 0 or cells.max() >= nv):
            raise MeshIndexError(f"cell references a node index outside 0..{nv - 1}")
        if len(cells) == 0:
            raise MeshError("mesh has no cells")
        signed = _signed_area(nodes[cells])
        flip = signed < 0
        cells[flip] = cells[flip][:, [0, 2, 1]]
        lo, hi = nodes.min(axis=0), nodes.max(axis=0)
        diag2 = float(np.sum((hi - lo) ** 2))
        bad = np.flatnonzero(np.abs(signed) <= 1e-14 * diag2)
        if bad.size:
            raise DegenerateCellError(f"cell {bad[0]} has (near) zero area")

        self.nodes = nodes
        self.cells = cells
        self.nodes.flags.writeable = False
        self.cells.flags.writeable = False
        self.neighbors, self.neighbor_edge = build_topology(cells)
        self.neighbors.flags.writeable = False
        self.neighbor_edge.flags.writeable = False

        tags = {}
        for (a, b), tag in boundary.items():
            if a >= nv or b >= nv or a < 0 or b < 0:
                raise MeshIndexError(f"boundary edge ({a}, {b}) references a missing node")
            tags[(min(a, b), max(a, b))] = BoundaryTag(tag)
        edge_tags = np.zeros((len(cells), 3), dtype=np.int64)
        used = set()
        for i, k in zip(*np.nonzero(self.neighbors < 0)):
            a, b = cells[i, k], cells[i, (k + 1) % 3]
            key = (min(a, b), max(a, b))
            if key not in tags:
                raise MeshError(f"boundary edge {key} of cell {i} has no tag")
            edge_tags[i, k] = tags[key]
            used.add(key)
        extra = set(tags) - used
        if extra:
            raise MeshError(f"tagged edge {sorted(extra)[0]} is not a boundary edge")
        self.boundary = tags
        self.edge_tags = edge_tags
        self.edge_tags.flags.writeable = False
        self.bbox = (float(lo[0]), float(hi[0]), float(lo[1]), float(hi[1]))

    @property
    def n_cells(self):
        return len(self.cells)

    @property
    def n_nodes(self):
        return len(self.nodes)

    def __len__(self):
        return len(self.cells)

    def __repr__(self):
        return f"Mesh(n_nodes={self.n_nodes}, n_cells={self.n_cells})"

    # geometry, vectorized over cells
    @cached_property
    def vertices(self):
        v = self.nodes[self.cells]
        v.flags.writeable = False
        return v

    @cached_property
    def areas(self):
        return _signed_area(self.vertices)

    @cached_property
    def centroids(self):
        return self.vertices.mean(axis=1)

    @cached_property
    def edge_vectors(self):
        v = self.vertices
        return np.roll(v, -1, axis=1) - v

    @cached_property
    def edge_lengths(self):
        return np.hypot(self.edge_vectors[..., 0], self.edge_vectors[..., 1])

    @cached_property
    def normals(self):
        # CCW orientation: outward normal is the edge vector rotated clockwise
        e = self.edge_vectors
        n = np.stack([e[..., 1], -e[..., 0]], axis=-1)
        return n / self.edge_lengths[..., None]

    @cached_property
    def edge_points(self):
        """Gauss points, shape (M, 3, 3, 2): cell, edge, point along the edge."""
        v = self.vertices
        start = v[:, :, None, :]
        return start + GAUSS3_NODES[None, None, :, None] * self.edge_vectors[:, :, None, :]

    @cached_property
    def cell_points(self):
        """Interior quadrature points, shape (M, 12, 2)."""
        return np.einsum("qk,ikd->iqd", TRI_BARY, self.vertices)

    @cached_property
    def size_scale(self):
        """sqrt of the cell area, the local length scale."""
        return np.sqrt(self.areas)

    def cell_average(self, f, cells=None):
        """Cell averages of ``f(x, y)`` via the degree-6 interior rule.

        ``f`` is called with arrays of x and y and may return trailing
        components, e.g. shape (..., 4).
        """
        pts = self.cell_points if cells is None else self.cell_points[cells]
        vals = np.asarray(f(pts[..., 0], pts[..., 1]), dtype=float)
        if vals.ndim < pts.ndim - 1:
            vals = np.broadcast_to(vals, pts.shape[:-1])
        if vals.ndim == pts.ndim - 1:
            return vals @ TRI_WEIGHTS
        return np.einsum("q,...qc->...c", TRI_WEIGHTS, vals)


def cell_geometry(mesh, i):
    if not 0 <= i < mesh.n_cells:
        raise IndexError(f"cell index {i} out of range")
    return CellGeometry(
        area=float(mesh.areas[i]),
        centroid=mesh.centroids[i].copy(),
        edge_lengths=mesh.edge_lengths[i].copy(),
        normals=mesh.normals[i].copy(),
    )


def cell_average(mesh, i, f):
    return mesh.cell_average(f, cells=np.array([i]))[0]


def _strip(line):
    return line.split("#", 1)[0].strip()


def load_mesh(text):
    """Parse the plain-text mesh format into a :class:`Mesh`."""
    lines = [s for s in (_strip(ln) for ln in text.splitlines()) if s]
    if not lines:
        raise MeshParseError("empty mesh file")
    try:
        nv, m, nb = (int(t) for t in lines[0].split())
    except ValueError:
        raise MeshParseError(f"bad header line: {lines[0]!r}") from None
    if len(lines) < 1 + nv + m + nb:
        raise MeshParseError("mesh file is truncated")
    body = lines[1:]
    try:
        nodes = np.array([[float(t) for t in ln.split()] for ln in body[:nv]])
        cells = np.array([[int(t) for t in ln.split()] for ln in body[nv:nv + m]],
                         dtype=np.int64)
    except ValueError as exc:
        raise MeshParseError(str(exc)) from None
    if nodes.shape != (nv, 2) or cells.shape != (m, 3):
        raise MeshParseError("node lines need 2 values and cell lines 3 values")
    boundary = {}
    for ln in body[nv + m:nv + m + nb]:
        parts = ln.split()
        if len(parts) != 3:
            raise MeshParseError(f"bad boundary line: {ln!r}")
        try:
            a, b, tag = int(parts[0]), int(parts[1]), BoundaryTag[parts[2]]
        except (ValueError, KeyError):
            raise MeshParseError(f"bad boundary line: {ln!r}") from None
        boundary[(a, b)] = tag
    if len(body) > nv + m + nb:
        raise MeshParseError("trailing content after the boundary section")
    return Mesh(nodes, cells, boundary)


def read_mesh(path):
    with open(path) as fh:
        return load_mesh(fh.read())


def dump_mesh(mesh):
    out = [f"{mesh.n_nodes} {mesh.n_cells} {len(mesh.boundary)}"]
    out += [f"{x!r} {y!r}" for x, y in mesh.nodes.tolist()]
    out += [f"{a} {b} {c}" for a, b, c in mesh.cells.tolist()]
    out += [f"{a} {b} {tag.name}" for (a, b), tag in sorted(mesh.boundary.items())]
    return "\n".join(out) + "\n"


def write_mesh(mesh, path):
    with open(path, "w") as fh:
        fh.write(dump_mesh(mesh))


def refine_uniform(mesh):
    """Split every triangle into four similar ones through edge midpoints."""
    nodes = [tuple(p) for p in mesh.nodes.tolist()]
    midpoint = {}

    def mid(a, b):
        key = (a, b) if a < b else (b, a)
        idx = midpoint.get(key)
        if idx is None:
            pa, pb = mesh.nodes[key[0]], mesh.nodes[key[1]]
            nodes.append(tuple(0.5 * (pa + pb)))
            idx = midpoint[key] = len(nodes) - 1
        return idx

    cells = []
    for a, b, c in mesh.cells.tolist():
        ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
        cells += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
    boundary = {}
    for (a, b), tag in mesh.boundary.items():
        m = midpoint[(a, b)]
        boundary[(a, m)] = tag
        boundary[(m, b)] = tag
    return Mesh(np.array(nodes), np.array(cells), boundary)
