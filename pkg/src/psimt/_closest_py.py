"""Numpy fallback for the closest-point kernel."""

import numpy as np


def closest_point_on_triangles(x, a, b, c):
    """Vectorised point-triangle projection (Voronoi-region classification)."""
    ab, ac, ax = b - a, c - a, x - a
    d1 = np.einsum("...i,...i", ab, ax)
    d2 = np.einsum("...i,...i", ac, ax)
    bx = x - b
    d3 = np.einsum("...i,...i", ab, bx)
    d4 = np.einsum("...i,...i", ac, bx)
    cx = x - c
    d5 = np.einsum("...i,...i", ab, cx)
    d6 = np.einsum("...i,...i", ac, cx)
    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2

    with np.errstate(divide="ignore", invalid="ignore"):
        denom = va + vb + vc
        v = vb / denom
        w = vc / denom
        out = a + ab * v[..., None] + ac * w[..., None]

        # edges; later assignments take priority over earlier ones
        m = (va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0)
        t = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        out = np.where(m[..., None], b + (c - b) * t[..., None], out)
        m = (vb <= 0) & (d2 >= 0) & (d6 <= 0)
        t = d2 / (d2 - d6)
        out = np.where(m[..., None], a + ac * t[..., None], out)
        m = (vc <= 0) & (d1 >= 0) & (d3 <= 0)
        t = d1 / (d1 - d3)
        out = np.where(m[..., None], a + ab * t[..., None], out)
    # vertices
    out = np.where(((d6 >= 0) & (d5 <= d6))[..., None], c, out)
    out = np.where(((d3 >= 0) & (d4 <= d3))[..., None], b, out)
    out = np.where(((d1 <= 0) & (d2 <= 0))[..., None], a, out)
    return out


def closest_among(x, verts, tris, cand, num_threads=1):
    """Closest point to ``x[m]`` over triangles ``cand[m, :]`` (out-of-range entries skipped)."""
    valid = (cand >= 0) & (cand < len(tris))
    safe = np.where(valid, cand, 0)
    p = verts[tris[safe]]
    xs = np.broadcast_to(x[:, None], safe.shape + (3,))
    q = closest_point_on_triangles(xs, p[..., 0, :], p[..., 1, :], p[..., 2, :])
    d = np.where(valid, np.linalg.norm(q - x[:, None], axis=2), np.inf)
    best = np.argmin(d, axis=1)
    rows = np.arange(len(x))
    return q[rows, best], d[rows, best], np.where(valid[rows, best], safe[rows, best], -1)
