# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Closest point among candidate triangles (Voronoi-region projection)."""

import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport sqrt, INFINITY

cnp.import_array()


cdef inline double _dot(double ax, double ay, double az, double bx, double by, double bz) noexcept nogil:
    return ax * bx + ay * by + az * bz


cdef inline void _project(const double* p, const double* a, const double* b, const double* c, double* q) noexcept nogil:
    cdef double abx = b[0] - a[0], aby = b[1] - a[1], abz = b[2] - a[2]
    cdef double acx = c[0] - a[0], acy = c[1] - a[1], acz = c[2] - a[2]
    cdef double apx = p[0] - a[0], apy = p[1] - a[1], apz = p[2] - a[2]
    cdef double d1 = _dot(abx, aby, abz, apx, apy, apz)
    cdef double d2 = _dot(acx, acy, acz, apx, apy, apz)
    cdef double bpx, bpy, bpz, cpx, cpy, cpz, d3, d4, d5, d6, va, vb, vc, v, w, den
    cdef int k
    if d1 <= 0 and d2 <= 0:
        for k in range(3):
            q[k] = a[k]
        return
    bpx = p[0] - b[0]; bpy = p[1] - b[1]; bpz = p[2] - b[2]
    d3 = _dot(abx, aby, abz, bpx, bpy, bpz)
    d4 = _dot(acx, acy, acz, bpx, bpy, bpz)
    if d3 >= 0 and d4 <= d3:
        for k in range(3):
            q[k] = b[k]
        return
    vc = d1 * d4 - d3 * d2
    if vc <= 0 and d1 >= 0 and d3 <= 0:
        v = d1 / (d1 - d3)
        q[0] = a[0] + v * abx; q[1] = a[1] + v * aby; q[2] = a[2] + v * abz
        return
    cpx = p[0] - c[0]; cpy = p[1] - c[1]; cpz = p[2] - c[2]
    d5 = _dot(abx, aby, abz, cpx, cpy, cpz)
    d6 = _dot(acx, acy, acz, cpx, cpy, cpz)
    if d6 >= 0 and d5 <= d6:
        for k in range(3):
            q[k] = c[k]
        return
    vb = d5 * d2 - d1 * d6
    if vb <= 0 and d2 >= 0 and d6 <= 0:
        w = d2 / (d2 - d6)
        q[0] = a[0] + w * acx; q[1] = a[1] + w * acy; q[2] = a[2] + w * acz
        return
    va = d3 * d6 - d5 * d4
    if va <= 0 and (d4 - d3) >= 0 and (d5 - d6) >= 0:
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        q[0] = b[0] + w * (c[0] - b[0]); q[1] = b[1] + w * (c[1] - b[1]); q[2] = b[2] + w * (c[2] - b[2])
        return
    den = 1.0 / (va + vb + vc)
    v = vb * den
    w = vc * den
    q[0] = a[0] + abx * v + acx * w
    q[1] = a[1] + aby * v + acy * w
    q[2] = a[2] + abz * v + acz * w


def closest_among(const double[:, ::1] x, const double[:, ::1] verts, const long[:, ::1] tris,
                  const long[:, ::1] cand, int num_threads=1):
    """Closest point to ``x[m]`` over triangles ``cand[m, :]`` (out-of-range entries skipped)."""
    cdef Py_ssize_t M = x.shape[0]
    cdef Py_ssize_t K = cand.shape[1]
    cdef Py_ssize_t T = tris.shape[0]
    point_arr = np.zeros((M, 3), dtype=np.float64)
    dist_arr = np.full(M, np.inf)
    tri_arr = np.full(M, -1, dtype=np.int64)
    cdef double[:, ::1] point = point_arr
    cdef double[::1] dist = dist_arr
    cdef long[::1] tri = tri_arr
    cdef Py_ssize_t m, j
    cdef long t
    cdef double q[3]
    cdef double d2, best, dx, dy, dz
    if num_threads < 1:
        num_threads = 1
    for m in prange(M, nogil=True, num_threads=num_threads, schedule="static"):
        best = INFINITY
        for j in range(K):
            t = cand[m, j]
            if t < 0 or t >= T:
                continue
            _project(&x[m, 0], &verts[tris[t, 0], 0], &verts[tris[t, 1], 0], &verts[tris[t, 2], 0], q)
            dx = q[0] - x[m, 0]
            dy = q[1] - x[m, 1]
            dz = q[2] - x[m, 2]
            d2 = dx * dx + dy * dy + dz * dz
            if d2 < best:
                best = d2
                tri[m] = t
                point[m, 0] = q[0]
                point[m, 1] = q[1]
                point[m, 2] = q[2]
        dist[m] = sqrt(best)
    return point_arr, dist_arr, tri_arr
