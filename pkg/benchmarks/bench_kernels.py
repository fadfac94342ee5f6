"""Compiled versus numpy kernels: direct Coulomb sums and closest-point queries.

    python benchmarks/bench_kernels.py [--repeat 3] [--json out.json]

Both backends are checked for agreement before timing.  ``PSIMT_THREADS``
caps the OpenMP threads of the compiled kernels.
"""

import argparse
import json
import timeit

import numpy as np

from psimt import kernels
from psimt.geometry import make_sphere


def coulomb_case(n_targets, n_sources, width, seed=0):
    rng = np.random.default_rng(seed)
    t = rng.uniform(-1, 1, (n_targets, 3))
    s = rng.uniform(-1, 1, (n_sources, 3))
    w = rng.standard_normal((n_sources, width))
    ex = np.full(n_targets, 0.05)

    def run(backend):
        return kernels.coulomb_sum(t, s, w, ex, backend=backend)

    return f"coulomb_sum {n_targets}x{n_sources}x{width}", run, lambda a, b: np.abs(a - b).max() / np.abs(a).max()


def closest_case(level, n_points, k, seed=0):
    surface, _ = make_sphere(level=level)
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.2, 1.2, (n_points, 3))
    cand = np.ascontiguousarray(surface.nearest_nodes(x, k)[1], dtype=np.int64)

    def run(backend):
        return kernels.closest_among(x, surface.vertices, surface.triangles, cand, backend=backend)

    return f"closest_among L{level} {n_points}x{k}", run, lambda a, b: np.abs(a[1] - b[1]).max()


CASES = [
    lambda: coulomb_case(2000, 5120, 8),
    lambda: coulomb_case(500, 28160, 4),
    lambda: closest_case(3, 20000, 8),
    lambda: closest_case(4, 20000, 32),
]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", default=None, help="also write the table as JSON")
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled extension not built; timing the numpy fallback only")
    print(f"threads: {kernels.threads()}")
    print(f"{'case':40s} " + " ".join(f"{b:>10s}" for b in backends) + f" {'speedup':>8s} {'max diff':>9s}")
    rows = []
    for make in CASES:
        name, run, diff = make()
        ref = run("python")
        times = {}
        d = max(float(diff(ref, run(b))) for b in backends)
        for b in backends:
            times[b] = min(timeit.repeat(lambda: run(b), number=1, repeat=args.repeat))
        speed = times["python"] / times["cython"] if "cython" in times else 1.0
        rows.append({"case": name, "seconds": times, "speedup": speed, "max_diff": d})
        print(f"{name:40s} " + " ".join(f"{times[b]:10.4f}" for b in backends) + f" {speed:8.2f} {d:9.2e}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2, sort_keys=True)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
