"""Reconstruction stencils and constrained least-squares operators.

For every real cell five stencils are built: a big central stencil holding
three neighbour layers (quartic reconstruction) and four small stencils
(three sectorial, one central) for linear reconstructions. Each stencil gets
a dense matrix mapping the stencil cell averages to polynomial coefficients
in the scaled local coordinates ``xi = (x - xc) / h``, ``eta = (y - yc) / h``
with ``h = sqrt(area)``. The target cell average is matched exactly.

Stencils may reach into mirror-image ghost cells placed outside boundaries
tagged ``EXACT``; those cells get their averages from the exact solution.
"""
from dataclasses import dataclass

import numpy as np

from .mesh import BoundaryTag, build_topology, _signed_area
from .quadrature import GAUSS3_NODES, TRI_BARY, TRI_WEIGHTS

BIG_STENCIL_MIN = 16
MAX_DEGREE = 4
RANK_TOL = 1e-10
# Largest accepted sum of |weights| mapping big-stencil averages to one edge
# Gauss point value. Interior quartics stay well below it; one-sided quartics
# at solid or outflow boundaries can exceed it by two orders of magnitude,
# which makes the explicit update unstable, so their degree is lowered.
LEBESGUE_MAX = 8.0


class RankDeficiencyError(ValueError):
    pass


def n_coeffs(degree):
    return (degree + 1) * (degree + 2) // 2


def monomial_exponents(degree):
    """Exponents ``(a, b)`` of ``xi**a * eta**b`` ordered by total degree."""
    return [(d - b, b) for d in range(degree + 1) for b in range(d + 1)]


def monomials(xi, eta, degree):
    """Basis values, shape ``xi.shape + (n_coeffs(degree),)``."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    return np.stack([xi ** a * eta ** b for a, b in monomial_exponents(degree)], axis=-1)


@dataclass(frozen=True)
class Polynomial:
    """Polynomial over the scaled local coordinates of one cell."""

    degree: int
    coeffs: np.ndarray  # (n_coeffs,) or (n_coeffs, n_components)
    center: np.ndarray
    h: float
    cell: int = -1

    def __post_init__(self):
        if len(self.coeffs) != n_coeffs(self.degree):
            raise ValueError("coefficient count does not match degree")

    def local(self, point):
        p = np.asarray(point, dtype=float)
        return (p[..., 0] - self.center[0]) / self.h, (p[..., 1] - self.center[1]) / self.h

    def __call__(self, point):
        return eval_poly(self, point)


def eval_poly(p, point):
    """Evaluate ``p`` at ``point`` (Horner in eta inside Horner in xi)."""
    xi, eta = p.local(point)
    c = np.asarray(p.coeffs, dtype=float)
    exps = monomial_exponents(p.degree)
    index = {e: k for k, e in enumerate(exps)}
    result = 0.0
    for a in range(p.degree, -1, -1):
        # q_a(eta) = sum_b c[a, b] eta**b
        inner = 0.0
        for b in range(p.degree - a, -1, -1):
            inner = inner * eta + c[index[(a, b)]]
        result = result * xi + inner
    return result


@dataclass(frozen=True)
class CellComplex:
    """Real cells followed by ghost cells, with adjacency over both."""

    vertices: np.ndarray  # (Me, 3, 2)
    neighbors: np.ndarray  # (Me, 3)
    n_real: int

    @property
    def n_cells(self):
        return len(self.vertices)

    @property
    def n_ghost(self):
        return self.n_cells - self.n_real

    @property
    def centroids(self):
        return self.vertices.mean(axis=1)

    @property
    def areas(self):
        return _signed_area(self.vertices)

    def cell_average(self, f, cells):
        pts = np.einsum("qk,ikd->iqd", TRI_BARY, self.vertices[cells])
        vals = np.asarray(f(pts[..., 0], pts[..., 1]), dtype=float)
        return np.einsum("q,iq...->i...", TRI_WEIGHTS, vals)


def _exact_sides(mesh, tags):
    """Bounding-box sides whose boundary edges all carry one of ``tags``."""
    x0, x1, y0, y1 = mesh.bbox
    scale = max(x1 - x0, y1 - y0)
    tol = 1e-12 * scale
    sides = {("x", x0): [], ("x", x1): [], ("y", y0): [], ("y", y1): []}
    for (a, b), tag in mesh.boundary.items():
        pa, pb = mesh.nodes[a], mesh.nodes[b]
        for axis, v in sides:
            c = 0 if axis == "x" else 1
            if abs(pa[c] - v) <= tol and abs(pb[c] - v) <= tol:
                sides[(axis, v)].append(tag)
    return [s for s, found in sides.items()
            if found and all(t in tags for t in found)]


def extend_with_ghosts(mesh, tags=(BoundaryTag.EXACT,), band_layers=6.0):
    """Mirror the mesh across every bounding-box side tagged with ``tags``.

    Cells whose centroid lies within ``band_layers`` maximum edge lengths of
    the side are reflected; corners between two reflected sides get the
    double reflection. Returns a :class:`CellComplex` whose first
    ``mesh.n_cells`` cells are the mesh cells in order.
    """
    sides = _exact_sides(mesh, set(tags))
    verts = [mesh.vertices]
    if sides:
        band = band_layers * float(mesh.edge_lengths.max())
        xs = [s for s in sides if s[0] == "x"]
        ys = [s for s in sides if s[0] == "y"]
        maps = [[s] for s in sides] + [[sx, sy] for sx in xs for sy in ys]
        cen = mesh.centroids
        for refl in maps:
            keep = np.ones(mesh.n_cells, dtype=bool)
            for axis, v in refl:
                c = 0 if axis == "x" else 1
                keep &= np.abs(cen[:, c] - v) < band
            v3 = mesh.vertices[keep].copy()
            for axis, v in refl:
                c = 0 if axis == "x" else 1
                v3[..., c] = 2.0 * v - v3[..., c]
            if len(refl) == 1:
                v3 = v3[:, [0, 2, 1]]
            verts.append(v3)
    allv = np.concatenate(verts)
    # topology through a node table keyed on rounded coordinates
    x0, x1, y0, y1 = mesh.bbox
    scale = max(x1 - x0, y1 - y0)
    table = {}
    cells = np.empty((len(allv), 3), dtype=np.int64)
    keys = np.round(allv / scale * 1e11).astype(np.int64)
    for i in range(len(allv)):
        for k in range(3):
            key = (int(keys[i, k, 0]), int(keys[i, k, 1]))
            cells[i, k] = table.setdefault(key, len(table))
    neighbors, _ = build_topology(cells)
    return CellComplex(allv, neighbors, mesh.n_cells)


@dataclass(frozen=True)
class StencilSet:
    big: list  # T1 per cell, target first
    sectors: list  # three lists per cell (T2..T4); empty list when dropped
    central: list  # T5 per cell
    degraded: np.ndarray  # bool per cell, set when any stencil was cut back

    def stencils(self, i):
        return [self.big[i], *self.sectors[i], self.central[i]]


def _sector_of(center, vertices, points):
    """Index k of the sector between rays to vertex k and vertex k+1."""
    out = np.full(len(points), -1, dtype=np.int64)
    d = points - center
    for k in range(3):
        r0 = vertices[k] - center
        r1 = vertices[(k + 1) % 3] - center
        c0 = r0[0] * d[:, 1] - r0[1] * d[:, 0]
        c1 = d[:, 0] * r1[1] - d[:, 1] * r1[0]
        out[(c0 >= 0) & (c1 > 0) & (out < 0)] = k
    return out


def _dedup(seq):
    seen = set()
    out = []
    for s in seq:
        if s not in seen:
            seen.add(s)
            out.append(s)
    return out


def build_stencils(cx, big_min=BIG_STENCIL_MIN):
    """Stencils for the real cells of a :class:`CellComplex` (or a Mesh)."""
    if not isinstance(cx, CellComplex):
        cx = CellComplex(cx.vertices, cx.neighbors, cx.n_cells)
    nbr = cx.neighbors
    cen = cx.centroids
    big, sectors, central = [], [], []
    degraded = np.zeros(cx.n_real, dtype=bool)
    for i in range(cx.n_real):
        first = [int(a) for a in nbr[i] if a >= 0]
        second, parents = [], []
        for a in first:
            for b in nbr[a]:
                if b >= 0 and b != i:
                    second.append(int(b))
                    parents.append(a)
        third = []
        for b, a in zip(second, parents):
            cand = [int(c) for c in nbr[b] if c >= 0 and c != a]
            if cand:
                dist = [float(np.sum((cen[c] - cen[i]) ** 2)) for c in cand]
                third.append(min(zip(dist, cand), key=lambda t: (-t[0], t[1]))[1])
        t1 = _dedup([i] + first + second + third)
        members = set(t1)
        frontier = list(t1)
        while len(t1) < big_min:
            layer = sorted({int(c) for f in frontier for c in nbr[f]
                            if c >= 0 and c not in members})
            if not layer:
                break
            t1 += layer
            members.update(layer)
            frontier = layer
        big.append(t1)
        central.append([i] + first)

        near = _dedup(first + second)
        near = [c for c in near if c != i]
        sec = _sector_of(cen[i], cx.vertices[i], cen[near]) if near else []
        groups = [[i] + [c for c, s in zip(near, sec) if s == k] for k in range(3)]
        sectors.append([g if len(g) >= 3 else [] for g in groups])
        if len(first) < 3 or any(len(g) < 3 for g in groups):
            degraded[i] = True
    return StencilSet(big, sectors, central, degraded)


def _local_frame(cx, i):
    return cx.centroids[i], float(np.sqrt(cx.areas[i]))


def basis_moments(cx, cells, center, h, degree):
    """Cell averages of every monomial over each listed cell, (n, n_coeffs)."""
    pts = np.einsum("qk,ikd->iqd", TRI_BARY, cx.vertices[cells])
    vals = monomials((pts[..., 0] - center[0]) / h, (pts[..., 1] - center[1]) / h, degree)
    return np.einsum("q,iqc->ic", TRI_WEIGHTS, vals)


def constrained_lsq(moments):
    """Map from stencil averages to coefficients, (n_coeffs, n).

    Row 0 of ``moments`` is the target cell. The constant coefficient is
    eliminated with the target equality; the remaining problem is solved in
    least squares through a QR factorization.
    """
    nc = moments.shape[1]
    n = moments.shape[0]
    reduced = moments[1:, 1:] - moments[0:1, 1:]
    if n - 1 < nc - 1:
        raise RankDeficiencyError(f"{n} cells cannot support {nc} coefficients")
    s = np.linalg.svd(reduced, compute_uv=False)
    if s[0] == 0.0 or s[-1] < RANK_TOL * s[0]:
        raise RankDeficiencyError("reduced least-squares matrix is rank deficient")
    q, r = np.linalg.qr(reduced)
    pinv = np.linalg.solve(r, q.T)  # (nc-1, n-1)
    op = np.zeros((nc, n))
    op[1:, 1:] = pinv
    op[1:, 0] = -pinv.sum(axis=1)
    op[0, :] = -moments[0, 1:] @ op[1:, :]
    op[0, 0] += 1.0
    return op


def _derivative_tables(degree):
    """For each multi-index (a, b) with 1 <= a + b <= degree, the monomial
    derivative as (coefficient array, exponent list)."""
    exps = monomial_exponents(degree)
    tables = []
    for order in range(1, degree + 1):
        for b in range(order + 1):
            a = order - b
            fac = np.zeros(len(exps))
            new_exp = []
            for k, (p, q) in enumerate(exps):
                if p >= a and q >= b:
                    fac[k] = np.prod(np.arange(p - a + 1, p + 1)) * np.prod(np.arange(q - b + 1, q + 1))
                new_exp.append((max(p - a, 0), max(q - b, 0)))
            tables.append((fac, new_exp))
    return tables


def smoothness_matrix(vertices, center, h, degree):
    """Quadratic form of the smoothness indicator on the coefficients.

    In scaled coordinates every term of the indicator reduces to the plain
    integral of the squared derivative over the scaled cell (unit area).
    """
    pts = TRI_BARY @ vertices
    xi = (pts[:, 0] - center[0]) / h
    eta = (pts[:, 1] - center[1]) / h
    nc = n_coeffs(degree)
    b = np.zeros((nc, nc))
    for fac, exps in _derivative_tables(degree):
        d = np.stack([fac[k] * xi ** p * eta ** q for k, (p, q) in enumerate(exps)], axis=-1)
        b += d.T @ (TRI_WEIGHTS[:, None] * d)
    return b


@dataclass
class ReconstructionOperator:
    """Packed per-cell operators; stencil slot 0 is the big stencil.

    Index arrays point into the cell complex (real cells, then ghosts).
    Padding columns carry zero weights.
    """

    idx: np.ndarray  # (M, 5, nmax) int
    count: np.ndarray  # (M, 5)
    coeff: np.ndarray  # (M, 5, 15, nmax) stencil averages -> coefficients
    beta: np.ndarray  # (M, 5, 14, nmax) stencil averages -> sqrt-factor of beta
    point: np.ndarray  # (M, 5, 9, nmax) stencil averages -> edge Gauss point values
    gamma: np.ndarray  # (M, 5) linear weights, zero for dropped stencils
    degree: np.ndarray  # (M, 5)
    centers: np.ndarray  # (M, 2)
    h: np.ndarray  # (M,)
    stencils: StencilSet

    @property
    def n_cells(self):
        return len(self.idx)

    def polynomials(self, i, averages):
        """Polynomials p_1..p_5 of cell ``i`` from the full averages array."""
        out = []
        for m in range(5):
            n = self.count[i, m]
            if n == 0:
                out.append(None)
                continue
            d = int(self.degree[i, m])
            vals = np.asarray(averages)[self.idx[i, m, :n]]
            c = self.coeff[i, m, :n_coeffs(d), :n] @ vals
            out.append(Polynomial(d, c, self.centers[i], float(self.h[i]), i))
        return out


def assemble_operator(cx, stencil_list, i, edge_points, degree):
    """Coefficient, smoothness and point-value maps for one stencil of cell ``i``.

    ``edge_points`` are the (9, 2) Gauss points of the cell's edges. Returns
    ``(coeff, beta_factor, point_values)``.
    """
    center, h = _local_frame(cx, i)
    mom = basis_moments(cx, np.asarray(stencil_list), center, h, degree)
    op = constrained_lsq(mom)
    bmat = smoothness_matrix(cx.vertices[i], center, h, degree)
    chol = np.linalg.cholesky(bmat[1:, 1:])
    beta_factor = chol.T @ op[1:, :]
    phi = monomials((edge_points[:, 0] - center[0]) / h,
                    (edge_points[:, 1] - center[1]) / h, degree)
    return op, beta_factor, phi @ op


def build_operators(mesh, cx, stencils, linear_weights=(0.96, 0.01, 0.01, 0.01, 0.01),
                    lebesgue_max=LEBESGUE_MAX):
    """Assemble every stencil of every real cell once for the whole run.

    The big stencil gets the highest degree (4 down to 1) that is both
    solvable and has point-value Lebesgue constant at most ``lebesgue_max``;
    degree 1 is accepted whenever it is solvable. ``None`` disables the check.
    """
    m = mesh.n_cells
    lists = [stencils.stencils(i) for i in range(m)]
    nmax = max(len(s) for ls in lists for s in ls)
    ncmax = n_coeffs(MAX_DEGREE)
    idx = np.zeros((m, 5, nmax), dtype=np.int64)
    count = np.zeros((m, 5), dtype=np.int64)
    coeff = np.zeros((m, 5, ncmax, nmax))
    beta = np.zeros((m, 5, ncmax - 1, nmax))
    point = np.zeros((m, 5, 9, nmax))
    gamma = np.zeros((m, 5))
    degree = np.zeros((m, 5), dtype=np.int64)
    lw = np.asarray(linear_weights, dtype=float)
    degraded = stencils.degraded.copy()
    pts_all = mesh.edge_points.reshape(m, 9, 2)
    for i in range(m):
        pts = pts_all[i]
        for s, members in enumerate(lists[i]):
            if not members:
                continue
            degrees = range(MAX_DEGREE, 0, -1) if s == 0 else (1,)
            for d in degrees:
                try:
                    op, bf, pv = assemble_operator(cx, members, i, pts, d)
                except RankDeficiencyError:
                    continue
                if (s == 0 and d > 1 and lebesgue_max is not None
                        and np.abs(pv).sum(axis=1).max() > lebesgue_max):
                    continue
                break
            else:
                if s == 0:
                    raise RankDeficiencyError(f"cell {i}: big stencil supports no polynomial")
                degraded[i] = True
                continue
            if s == 0 and d < MAX_DEGREE:
                degraded[i] = True
            n = len(members)
            nc = n_coeffs(d)
            idx[i, s, :n] = members
            count[i, s] = n
            coeff[i, s, :nc, :n] = op
            beta[i, s, :nc - 1, :n] = bf
            point[i, s, :, :n] = pv
            degree[i, s] = d
            gamma[i, s] = lw[s]
        small = gamma[i, 1:].sum()
        if small > 0:
            gamma[i, 1:] *= lw[1:].sum() / small
            gamma[i, 0] = lw[0]
        else:
            gamma[i, 0] = 1.0
    final = StencilSet(stencils.big, stencils.sectors, stencils.central, degraded)
    return ReconstructionOperator(idx, count, coeff, beta, point, gamma, degree,
                                  cx.centroids[:m].copy(), np.sqrt(cx.areas[:m]), final)
