"""Benchmark: compiled segment kernel vs the numpy fallback.

Runs the fractional-Euler segment on a family of problem sizes and prints
a table of per-call times and the speedup.  Usage:

    python benchmarks/bench_kernels.py [--repeat 5]

The numpy fallback routes the O(E^2) history contraction through BLAS,
so the compiled kernel's edge is largest when nodes x width is small
relative to the step count and call overhead dominates.
"""

import argparse
import sys
import time

import numpy as np

sys.path.insert(0, "src")

from fdgcl.datagen import SbmSpec, generate_sbm  # noqa: E402
from fdgcl.kernels import _pure  # noqa: E402
from fdgcl.solver import quadrature_weights  # noqa: E402

try:
    from fdgcl.kernels import _fast
except ImportError:
    _fast = None

CASES = [
    # (nodes, width, steps, alpha)
    (30, 8, 200, 0.1),
    (100, 32, 60, 0.3),
    (300, 32, 8, 0.5),
    (300, 128, 30, 0.5),
    (1000, 64, 20, 0.7),
]


def bench(fn, args, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    opts = ap.parse_args()

    if _fast is None:
        print("compiled kernel unavailable; build with "
              "`python setup.py build_ext --inplace` first")
        return 1

    print(f"{'nodes':>6} {'width':>6} {'steps':>6} {'alpha':>6} "
          f"{'numpy (ms)':>11} {'cython (ms)':>12} {'speedup':>8}")
    for n, d, steps, alpha in CASES:
        ds = generate_sbm(SbmSpec(n=n, classes=2, p_in=min(20.0 / n, 0.9),
                                  p_out=min(5.0 / n, 0.5), d_in=4, seed=0))
        a = ds.graph.norm_adjacency
        z0 = np.random.default_rng(0).normal(size=(n, d))
        w = quadrature_weights(alpha, steps)
        args = (a.indptr, a.indices, a.data, z0, w, 0.1)
        ref = _pure.segment_grand(*args)
        got = _fast.segment_grand(*args)
        assert np.abs(ref - got).max() < 1e-10, "backends disagree"
        t_np = bench(_pure.segment_grand, args, opts.repeat)
        t_cy = bench(_fast.segment_grand, args, opts.repeat)
        print(f"{n:>6} {d:>6} {steps:>6} {alpha:>6} "
              f"{1e3 * t_np:>11.2f} {1e3 * t_cy:>12.2f} "
              f"{t_np / t_cy:>8.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
