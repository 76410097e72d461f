"""Compare the compiled and numpy evaluation backends on the default grid.

Usage: python benchmarks/bench_kernel.py [repeats]
"""

import sys
import time

import numpy as np

import photonic_puf.kernel as kernel
from photonic_puf.encoding import GridConfig, generate_challenge_grid
from photonic_puf.model import build_puf


def time_backend(backend, mats, ex2, dphi, repeats):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = kernel.encode_responses(mats, ex2, dphi, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    repeats = int(sys.argv[1]) if len(sys.argv) > 1 else 3
    grid = generate_challenge_grid(GridConfig())
    ex2, dphi = grid[:, 0].copy(), grid[:, 1].copy()
    mats = build_puf(0).output_matrices()
    n_evals = ex2.shape[0] * mats.shape[0] * 2

    backends = ["numpy"]
    if kernel.BACKEND == "compiled":
        backends.insert(0, "compiled")
    else:
        print("compiled kernel not built; benchmarking numpy fallback only")

    results = {}
    for backend in backends:
        elapsed, codes = time_backend(backend, mats, ex2, dphi, repeats)
        results[backend] = codes
        rate = n_evals / elapsed / 1e6
        print(f"{backend:>9}: {elapsed:7.3f} s  ({rate:6.1f} M cell-evals/s)")

    if len(results) == 2 and np.array_equal(results["compiled"], results["numpy"]):
        print("backends agree bit-for-bit")
    elif len(results) == 2:
        print("WARNING: backend outputs differ")


if __name__ == "__main__":
    main()
