"""Pure-numpy implementation of the vector Coulomb sum (fallback for the compiled kernel)."""

import numpy as np

_CHUNK_PAIRS = 1 << 21


def coulomb_sum(targets, sources, weights, exclude, num_threads=1):
    """out[m, k, :] = sum_n (x_m - y_n)_k / |x_m - y_n|^3 * w_n, skipping |r| <= exclude[m]."""
    targets = np.asarray(targets, dtype=float)
    sources = np.asarray(sources, dtype=float)
    weights = np.asarray(weights, dtype=float)
    exclude = np.asarray(exclude, dtype=float)
    M, N = len(targets), len(sources)
    out = np.zeros((M, 3, weights.shape[1]))
    step = max(1, _CHUNK_PAIRS // max(N, 1))
    for lo in range(0, M, step):
        hi = min(M, lo + step)
        r = targets[lo:hi, None, :] - sources[None, :, :]
        r2 = np.einsum("mnk,mnk->mn", r, r)
        keep = (r2 > exclude[lo:hi, None] ** 2) & (r2 > 0)
        inv3 = np.zeros_like(r2)
        inv3[keep] = r2[keep] ** -1.5
        out[lo:hi] = np.einsum("mnk,mn,nw->mkw", r, inv3, weights, optimize=True)
    return out
