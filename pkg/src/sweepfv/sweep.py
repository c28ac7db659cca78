"""Alternating sweep orderings from centroid distances to reference points."""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SweepOrderings:
    ref_points: np.ndarray  # (4, 2)
    ascent: tuple  # four int arrays
    descent: tuple

    def schedule(self):
        """The eight orderings in sweep order: R1 ascent, R1 descent, R2 ascent, ..."""
        out = []
        for up, down in zip(self.ascent, self.descent):
            out += [up, down]
        return out

    def labels(self):
        return [f"S{l + 1}{s}" for l in range(len(self.ascent)) for s in "+-"]


def default_reference_points(mesh, override=None):
    """Bounding-box corners, or ``override`` echoed back as a (4, 2) array."""
    if override is not None:
        pts = np.asarray(override, dtype=float).reshape(-1, 2)
        if pts.shape != (4, 2):
            raise ValueError("exactly four reference points are required")
        return pts
    x0, x1, y0, y1 = mesh.bbox
    return np.array([[x0, y0], [x0, y1], [x1, y0], [x1, y1]])


def order_by_distance(centroids, ref):
    """Ascent and descent orders by distance to ``ref``; ties by cell index.

    Both orders break ties with the lower cell index first.
    """
    d = np.hypot(centroids[:, 0] - ref[0], centroids[:, 1] - ref[1])
    idx = np.arange(len(d))
    up = np.lexsort((idx, d))
    down = np.lexsort((idx, -d))
    return up, down


def build_orderings(mesh, ref_points=None):
    refs = default_reference_points(mesh, ref_points)
    cen = mesh.centroids if hasattr(mesh, "centroids") else np.asarray(mesh)
    ups, downs = [], []
    for r in refs:
        up, down = order_by_distance(cen, r)
        ups.append(up)
        downs.append(down)
    return SweepOrderings(refs, tuple(ups), tuple(downs))


def dump_orderings(orderings):
    """Text table, one column per ordering, one row per sweep position."""
    cols = orderings.schedule()
    lines = [" ".join(orderings.labels())]
    for row in zip(*cols):
        lines.append(" ".join(str(int(v)) for v in row))
    return "\n".join(lines) + "\n"
