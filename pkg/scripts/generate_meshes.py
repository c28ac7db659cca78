"""Regenerate the packaged fixture meshes.

Boundary nodes are placed uniformly; interior nodes start on a jittered
lattice and are smoothed with a few Lloyd-style passes over the Delaunay
triangulation. Requires scipy (development only).
"""
import argparse
from pathlib import Path

import numpy as np
from scipy.spatial import Delaunay

DATA = Path(__file__).resolve().parents[1] / "src" / "sweepfv" / "data"


def _cross(a, b):
    return a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]


def min_angle(nodes, cells):
    a = nodes[cells]
    worst = np.pi
    for k in range(3):
        u = a[:, (k + 1) % 3] - a[:, k]
        v = a[:, (k + 2) % 3] - a[:, k]
        cos = (u * v).sum(1) / np.linalg.norm(u, axis=1) / np.linalg.norm(v, axis=1)
        worst = min(worst, np.arccos(cos).min())
    return np.degrees(worst)


def boundary_nodes(x0, x1, y0, y1, nx, ny):
    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    pts = [(x, y0) for x in xs[:-1]]
    pts += [(x1, y) for y in ys[:-1]]
    pts += [(x, y1) for x in xs[::-1][:-1]]
    pts += [(x0, y) for y in ys[::-1][:-1]]
    return np.array(pts)


def interior_nodes(x0, x1, y0, y1, n, rng):
    # hexagonal-ish lattice sized to hold roughly n points
    area = (x1 - x0) * (y1 - y0)
    h = np.sqrt(2.0 * area / (np.sqrt(3.0) * n))
    while True:
        pts = _lattice(x0, x1, y0, y1, h)
        if len(pts) >= n:
            break
        h *= 0.97
    pts += rng.uniform(-0.15 * h, 0.15 * h, pts.shape)
    if len(pts) > n:
        pts = pts[np.sort(rng.choice(len(pts), n, replace=False))]
    return pts


def _lattice(x0, x1, y0, y1, h):
    pts = []
    row = 0
    y = y0 + 0.5 * h
    while y < y1 - 0.3 * h:
        off = 0.5 * h if row % 2 else 0.0
        x = x0 + 0.5 * h + off
        while x < x1 - 0.3 * h:
            pts.append((x, y))
            x += h
        y += h * np.sqrt(3.0) / 2.0
        row += 1
    return np.array(pts)


def lloyd(bnd, inner, box, passes=30):
    x0, x1, y0, y1 = box
    for _ in range(passes):
        allp = np.vstack([bnd, inner])
        tri = Delaunay(allp).simplices
        cen = allp[tri].mean(axis=1)
        area = 0.5 * np.abs(_cross(allp[tri[:, 1]] - allp[tri[:, 0]],
                                   allp[tri[:, 2]] - allp[tri[:, 0]]))
        acc = np.zeros_like(allp)
        wsum = np.zeros(len(allp))
        for k in range(3):
            np.add.at(acc, tri[:, k], cen * area[:, None])
            np.add.at(wsum, tri[:, k], area)
        new = acc[len(bnd):] / wsum[len(bnd):, None]
        new[:, 0] = np.clip(new[:, 0], x0 + 1e-3, x1 - 1e-3)
        new[:, 1] = np.clip(new[:, 1], y0 + 1e-3, y1 - 1e-3)
        inner = new
    return inner


def make_mesh(box, nx, ny, n_inner, tags, seed):
    rng = np.random.default_rng(seed)
    x0, x1, y0, y1 = box
    bnd = boundary_nodes(x0, x1, y0, y1, nx, ny)
    inner = lloyd(bnd, interior_nodes(x0, x1, y0, y1, n_inner, rng), box)
    nodes = np.vstack([bnd, inner])
    cells = Delaunay(nodes).simplices.copy()
    a = nodes[cells]
    signed = _cross(a[:, 1] - a[:, 0], a[:, 2] - a[:, 0])
    cells[signed < 0] = cells[signed < 0][:, [0, 2, 1]]
    nb = len(bnd)
    edges = []
    for k in range(nb):
        i, j = k, (k + 1) % nb
        mid = 0.5 * (nodes[i] + nodes[j])
        if abs(mid[1] - y0) < 1e-12:
            tag = tags["bottom"]
        elif abs(mid[0] - x1) < 1e-12:
            tag = tags["right"]
        elif abs(mid[1] - y1) < 1e-12:
            tag = tags["top"]
        else:
            tag = tags["left"]
        edges.append((i, j, tag))
    return nodes, cells, edges


def write(path, nodes, cells, edges, comment):
    with open(path, "w") as fh:
        fh.write(f"# {comment}\n")
        fh.write(f"{len(nodes)} {len(cells)} {len(edges)}\n")
        for x, y in nodes.tolist():
            fh.write(f"{x!r} {y!r}\n")
        for c in cells:
            fh.write(f"{c[0]} {c[1]} {c[2]}\n")
        for i, j, t in edges:
            fh.write(f"{i} {j} {t}\n")
    print(path, len(nodes), "nodes", len(cells), "cells",
          f"min angle {min_angle(nodes, cells):.1f} deg")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--shock-n", type=int, default=64)
    args = ap.parse_args()
    two_pi = 2.0 * np.pi
    exact = dict(bottom="EXACT", right="EXACT", top="EXACT", left="EXACT")
    nodes, cells, edges = make_mesh((0.0, two_pi, 0.0, two_pi), 4, 4, 22, exact, 7)
    write(DATA / "square_58.mesh", nodes, cells, edges,
          "unstructured mesh of [0, 2pi]^2, exact-solution boundaries")
    shock = dict(bottom="WALL", right="OUTFLOW", top="DIRICHLET_TOP",
                 left="DIRICHLET_LEFT")
    n = args.shock_n
    ny = n // 4
    h = 4.0 / n
    n_inner = int(round(4.0 / (np.sqrt(3.0) / 2.0 * h * h))) - 2 * (n + ny)
    nodes, cells, edges = make_mesh((0.0, 4.0, 0.0, 1.0), n, ny, n_inner, shock, 11)
    write(DATA / "shock_reflection.mesh", nodes, cells, edges,
          "unstructured mesh of [0, 4] x [0, 1], regular shock reflection")


if __name__ == "__main__":
    main()
