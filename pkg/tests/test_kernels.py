import numpy as np
import pytest

from psimt import kernels


def _direct(t, s, w, exclude):
    r = t[:, None] - s[None]
    d = np.linalg.norm(r, axis=2)
    keep = (d > exclude[:, None]) & (d > 0)
    inv = np.where(keep, 1 / np.where(keep, d, 1) ** 3, 0)
    return np.einsum("mnk,mn,nw->mkw", r, inv, w)


def test_frozen_single_source():
    out = kernels.coulomb_sum(np.array([[2.0, 0, 0]]), np.zeros((1, 3)), np.ones((1, 1)))
    np.testing.assert_allclose(out[0, :, 0], [0.25, 0, 0])


@pytest.mark.parametrize("backend", kernels.available_backends())
def test_backends_match_direct(backend, rng):
    t = rng.uniform(-1, 1, (37, 3))
    s = rng.uniform(-1, 1, (53, 3))
    s[0] = t[0]  # coincident source is skipped
    w = rng.standard_normal((53, 5))
    ex = rng.uniform(0, 0.5, 37)
    out = kernels.coulomb_sum(t, s, w, ex, backend=backend)
    np.testing.assert_allclose(out, _direct(t, s, w, ex), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("backend", kernels.available_backends())
def test_closest_among_backends(backend, sphere2, rng):
    s, _ = sphere2
    x = rng.uniform(-1.5, 1.5, (25, 3))
    cand = rng.integers(-2, s.n_triangles + 2, (25, 9))
    ref = kernels.closest_among(x, s.vertices, s.triangles, cand, backend="python")
    got = kernels.closest_among(x, s.vertices, s.triangles, cand, backend=backend)
    np.testing.assert_allclose(got[0], ref[0], atol=1e-13)
    np.testing.assert_allclose(got[1], ref[1], atol=1e-13)


def test_set_backend():
    old = kernels.BACKEND
    try:
        kernels.set_backend("python")
        assert kernels.BACKEND == "python"
        with pytest.raises(ValueError):
            kernels.set_backend("fortran")
    finally:
        kernels.set_backend(old)


def test_threads_env(monkeypatch):
    monkeypatch.setenv("PSIMT_THREADS", "3")
    assert kernels.threads() == 3
    monkeypatch.setenv("PSIMT_THREADS", "junk")
    assert kernels.threads() == 1


def test_fallback_selected_without_extension():
    import subprocess
    import sys

    code = (
        "import sys, importlib.abc\n"
        "class Block(importlib.abc.MetaPathFinder):\n"
        "    def find_spec(self, name, path, target=None):\n"
        "        if name.startswith('psimt._ext.'):\n"
        "            raise ImportError(name)\n"
        "sys.meta_path.insert(0, Block())\n"
        "from psimt import kernels\n"
        "print(kernels.BACKEND, kernels.available_backends())\n"
    )
    r = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True)
    assert r.stdout.split()[0] == "python"


def test_environment_forces_python_backend():
    import os
    import subprocess
    import sys

    env = dict(os.environ, PSIMT_BACKEND="python")
    r = subprocess.run([sys.executable, "-c", "from psimt import kernels; print(kernels.BACKEND)"], capture_output=True, text=True, env=env, check=True)
    assert r.stdout.strip() == "python"
