# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Direct-sum vector Coulomb field with per-target exclusion radius."""

import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport sqrt

cnp.import_array()


def coulomb_sum(const double[:, ::1] targets, const double[:, ::1] sources, const double[:, ::1] weights,
                const double[::1] exclude, int num_threads=1):
    """out[m, k, :] = sum_n (x_m - y_n)_k / |x_m - y_n|^3 * w_n, skipping |r| <= exclude[m]."""
    cdef Py_ssize_t M = targets.shape[0]
    cdef Py_ssize_t N = sources.shape[0]
    cdef Py_ssize_t W = weights.shape[1]
    out_arr = np.zeros((M, 3, W), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t m, n, w
    cdef double rx, ry, rz, r2, inv3, ex2, cx, cy, cz
    if num_threads < 1:
        num_threads = 1
    for m in prange(M, nogil=True, num_threads=num_threads, schedule="static"):
        ex2 = exclude[m] * exclude[m]
        for n in range(N):
            rx = targets[m, 0] - sources[n, 0]
            ry = targets[m, 1] - sources[n, 1]
            rz = targets[m, 2] - sources[n, 2]
            r2 = rx * rx + ry * ry + rz * rz
            if r2 <= ex2 or r2 == 0.0:
                continue
            inv3 = 1.0 / (r2 * sqrt(r2))
            cx = rx * inv3
            cy = ry * inv3
            cz = rz * inv3
            for w in range(W):
                out[m, 0, w] += cx * weights[n, w]
                out[m, 1, w] += cy * weights[n, w]
                out[m, 2, w] += cz * weights[n, w]
    return out_arr
