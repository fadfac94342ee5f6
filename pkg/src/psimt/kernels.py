"""Backend selection for the compiled kernels (direct Coulomb sums, closest points).

The compiled extension is used when importable; ``PSIMT_BACKEND=python``
forces the numpy fallback.  ``PSIMT_THREADS`` caps OpenMP threads in the
compiled kernel.
"""

import logging
import os

import numpy as np

from . import _closest_py, _coulomb_py

log = logging.getLogger(__name__)

try:
    from ._ext import closest as _closest_ext
    from ._ext import coulomb as _coulomb_ext
except ImportError:  # pragma: no cover - depends on the build
    _coulomb_ext = _closest_ext = None

_BACKENDS = {"python": (_coulomb_py.coulomb_sum, _closest_py.closest_among)}
if _coulomb_ext is not None:
    _BACKENDS["cython"] = (_coulomb_ext.coulomb_sum, _closest_ext.closest_among)


def _initial_backend():
    wanted = os.environ.get("PSIMT_BACKEND", "").strip().lower()
    if wanted:
        if wanted not in _BACKENDS:
            log.warning("backend %r unavailable, using %s", wanted, "cython" if _coulomb_ext else "python")
        else:
            return wanted
    return "cython" if _coulomb_ext is not None else "python"


BACKEND = _initial_backend()


def available_backends():
    return sorted(_BACKENDS)


def set_backend(name):
    global BACKEND
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available (have {available_backends()})")
    BACKEND = name


def threads():
    try:
        return max(1, int(os.environ.get("PSIMT_THREADS", os.cpu_count() or 1)))
    except ValueError:
        return 1


def coulomb_sum(targets, sources, weights, exclude=None, backend=None):
    """Vector Coulomb sum ``sum_n (x - y_n)/|x - y_n|^3 (x) w_n`` -> ``(M, 3, W)``.

    Sources closer than ``exclude[m]`` to target ``m`` (and coincident ones)
    are skipped.
    """
    targets = np.ascontiguousarray(np.atleast_2d(targets), dtype=float)
    sources = np.ascontiguousarray(np.atleast_2d(sources), dtype=float)
    weights = np.ascontiguousarray(weights, dtype=float).reshape(len(sources), -1)
    if exclude is None:
        exclude = np.zeros(len(targets))
    exclude = np.ascontiguousarray(np.broadcast_to(exclude, (len(targets),)), dtype=float)
    fn = _BACKENDS[backend or BACKEND][0]
    return np.asarray(fn(targets, sources, weights, exclude, threads()))


def closest_among(x, verts, tris, cand, backend=None):
    """Closest point to ``x[m]`` over the triangles listed in ``cand[m]``.

    Returns ``(points (M, 3), distances (M,), triangle indices (M,))``;
    entries of ``cand`` outside ``[0, len(tris))`` are ignored.
    """
    x = np.ascontiguousarray(x, dtype=float)
    verts = np.ascontiguousarray(verts, dtype=float)
    tris = np.ascontiguousarray(tris, dtype=np.int64)
    cand = np.ascontiguousarray(cand, dtype=np.int64)
    fn = _BACKENDS[backend or BACKEND][1]
    p, d, t = fn(x, verts, tris, cand, threads())
    return np.asarray(p), np.asarray(d), np.asarray(t)
