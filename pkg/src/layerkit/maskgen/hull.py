"""Monotone-chain convex hull and convex-polygon rasterization."""

from __future__ import annotations

import numpy as np


def convex_hull(points) -> np.ndarray:
    """Counter-clockwise convex hull of (x, y) points via monotone chain.

    Collinear boundary points are dropped, so no three retained vertices
    are collinear.  Degenerate inputs give point or segment "polygons".
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if pts.shape[0] == 0:
        raise ValueError("need at least one point")
    uniq = np.unique(pts, axis=0)
    order = np.lexsort((uniq[:, 1], uniq[:, 0]))
    uniq = uniq[order]
    if uniq.shape[0] <= 2:
        return uniq

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[np.ndarray] = []
    for p in uniq:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[np.ndarray] = []
    for p in uniq[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def fill_convex_polygon(vertices: np.ndarray, height: int, width: int) -> np.ndarray:
    """Rasterize a convex CCW polygon to a boolean (height, width) mask.

    Boundary-inclusive half-plane test, so every input point of the hull
    (including vertices) lands inside the mask.
    """
    verts = np.asarray(vertices, dtype=np.float64).reshape(-1, 2)
    mask = np.zeros((height, width), dtype=bool)
    if verts.shape[0] == 0:
        return mask
    x_min = max(int(np.floor(verts[:, 0].min())), 0)
    x_max = min(int(np.ceil(verts[:, 0].max())), width - 1)
    y_min = max(int(np.floor(verts[:, 1].min())), 0)
    y_max = min(int(np.ceil(verts[:, 1].max())), height - 1)
    if x_min > x_max or y_min > y_max:
        return mask
    if verts.shape[0] == 1:
        x, y = np.round(verts[0]).astype(int)
        if 0 <= y < height and 0 <= x < width:
            mask[y, x] = True
        return mask
    ys, xs = np.mgrid[y_min : y_max + 1, x_min : x_max + 1]
    inside = np.ones(ys.shape, dtype=bool)
    n = verts.shape[0]
    if n == 2:
        # Segment: pixels within half a pixel of the line and inside its extent.
        a, b = verts
        ab = b - a
        length2 = ab @ ab
        t = ((xs - a[0]) * ab[0] + (ys - a[1]) * ab[1]) / length2
        t = np.clip(t, 0.0, 1.0)
        dist2 = (xs - (a[0] + t * ab[0])) ** 2 + (ys - (a[1] + t * ab[1])) ** 2
        inside = dist2 <= 0.5**2
    else:
        eps = 1e-9
        for i in range(n):
            ax, ay = verts[i]
            bx, by = verts[(i + 1) % n]
            cross = (bx - ax) * (ys - ay) - (by - ay) * (xs - ax)
            inside &= cross >= -eps
    mask[y_min : y_max + 1, x_min : x_max + 1] = inside
    return mask


def brute_force_hull(points) -> np.ndarray:
    """O(n^3) all-pairs half-plane hull oracle (tests only).

    Assumes points in general position (no three collinear), as produced
    by random float sampling.  A directed edge i->j belongs to the hull
    iff every other point lies strictly to its left; walking those edges
    yields the CCW cycle.
    """
    pts = np.unique(np.asarray(points, dtype=np.float64).reshape(-1, 2), axis=0)
    n = pts.shape[0]
    if n <= 2:
        order = np.lexsort((pts[:, 1], pts[:, 0]))
        return pts[order]
    succ: dict[int, int] = {}
    block = 256
    for i in range(n):
        rel = pts - pts[i]  # (n, 2)
        # Edge i->j is on the hull iff every other point q lies strictly to
        # the left of it: cross(p_j - p_i, p_q - p_i) > 0.  Candidates j are
        # eliminated blockwise over q; survivors shrink fast.
        alive = np.ones(n, dtype=bool)
        alive[i] = False
        for q0 in range(0, n, block):
            idx_j = np.nonzero(alive)[0]
            if idx_j.size == 0:
                break
            q_idx = np.arange(q0, min(q0 + block, n))
            side = np.outer(rel[idx_j, 0], rel[q_idx, 1]) - np.outer(rel[idx_j, 1], rel[q_idx, 0])
            left = side > 0
            left[:, q_idx == i] = True
            self_cols = np.searchsorted(q_idx, idx_j)
            in_block = (self_cols < q_idx.size)
            in_block[in_block] &= q_idx[self_cols[in_block]] == idx_j[in_block]
            left[np.nonzero(in_block)[0], self_cols[in_block]] = True
            alive[idx_j[~left.all(axis=1)]] = False
        hits = np.nonzero(alive)[0]
        if hits.size:
            succ[i] = int(hits[0])
    start = next(iter(succ))
    cycle = [start]
    cur = succ[start]
    while cur != start:
        cycle.append(cur)
        cur = succ[cur]
    verts = pts[cycle]
    # Rotate so the lexicographically smallest vertex leads, for comparison.
    lead = int(np.lexsort((verts[:, 1], verts[:, 0]))[0])
    return np.roll(verts, -lead, axis=0)
