#!/usr/bin/env python3
"""Benchmark the compiled kernel extension against the pure-numpy fallback.

Workloads mirror the package's hot paths: greedy separated-set selection
over orbit grids, Bowen cover matrices, and pairwise distance audits.
Both backends must return identical results; the table reports wall times
and speedups.

Usage: python benchmarks/bench_kernels.py [--quick]
"""

import argparse
import time

import numpy as np

from fiberdyn._kernels import backends


def workloads(quick):
    rng = np.random.default_rng(0)
    scale = 0.4 if quick else 1.0
    yield ("greedy circle N=%d n=8" % int(20000 * scale),
           "greedy_separated",
           (rng.random((int(20000 * scale), 8, 1)), 0.05))
    yield ("greedy torus  N=%d n=6" % int(8000 * scale),
           "greedy_separated",
           (rng.random((int(8000 * scale), 6, 2)), 0.1))
    yield ("cover matrix  N=%d n=6" % int(1500 * scale),
           "cover_matrix",
           (rng.random((int(1500 * scale), 6, 2)), 0.2))
    pairs = rng.integers(0, 4000, size=(200000, 2)).astype(np.int64)
    yield ("pairwise      K=200000",
           "pairwise_bowen",
           (rng.random((4000, 8, 2)), pairs))


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="smaller workloads")
    args = parser.parse_args()

    impls = backends()
    if "native" not in impls:
        print("native extension not built; only the fallback is available")
    print(f"{'workload':<28} " +
          " ".join(f"{name:>12}" for name in impls) + "  speedup")
    for label, fn, payload in workloads(args.quick):
        times = {}
        results = {}
        for name, mod in impls.items():
            t0 = time.perf_counter()
            results[name] = getattr(mod, fn)(*payload)
            times[name] = time.perf_counter() - t0
        if len(results) == 2:
            a, b = results.values()
            assert np.array_equal(np.asarray(a), np.asarray(b)), \
                f"backend mismatch on {label}"
        row = f"{label:<28} " + " ".join(f"{times[n]:>11.3f}s" for n in impls)
        if "native" in times and "fallback" in times:
            row += f"  {times['fallback'] / times['native']:>6.1f}x"
        print(row)


if __name__ == "__main__":
    main()
