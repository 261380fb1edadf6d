"""Compare the compiled and NumPy inference kernels on a realistic workload.

Runs the bundled band1 models over a block of random in-universe inputs with
both backends and reports per-record latency, speedup, and the largest
cross-backend disagreement (which should sit at float rounding level).

Usage: python benchmarks/bench_kernels.py [--records N] [--repeats K]
"""
import argparse
import time

import numpy as np

from regfuzz.fis import _pack
from regfuzz.kernels import available_backends
from regfuzz.model_io import load_fixture


def run_backend(impl, packed, X):
    n = X.shape[0]
    out = np.empty(n)
    fired = np.empty(n, dtype=np.uint8)
    if packed["kind"] == "mamdani":
        impl.mamdani_batch(
            X, packed["and"], packed["ante_shape"], packed["ante_params"],
            packed["weights"], packed["cons_shape"], packed["cons_params"],
            packed["lo"], packed["hi"], packed["resolution"], out, fired,
        )
    else:
        impl.sugeno_batch(
            X, packed["and"], packed["ante_shape"], packed["ante_params"],
            packed["weights"], packed["cons"], out, fired,
        )
    return out


def bench(name, model, X, repeats):
    packed = _pack(model)
    backends = available_backends()
    results, timings = {}, {}
    for bname, impl in backends.items():
        run_backend(impl, packed, X[:16])  # warm up
        best = float("inf")
        for _ in range(repeats):
            t0 = time.perf_counter()
            out = run_backend(impl, packed, X)
            best = min(best, time.perf_counter() - t0)
        results[bname] = out
        timings[bname] = best

    n = X.shape[0]
    print(f"\n{name}  ({n} records, {len(model.rules)} rules)")
    for bname in sorted(timings):
        per = timings[bname] / n * 1e6
        print(f"  {bname:<8} {timings[bname] * 1e3:8.2f} ms   {per:8.2f} us/record")
    if len(results) == 2:
        diff = float(np.max(np.abs(results["python"] - results["cython"])))
        speedup = timings["python"] / timings["cython"]
        print(f"  speedup {speedup:5.1f}x   max |python - cython| = {diff:.3g}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--records", type=int, default=20000)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    if len(available_backends()) < 2:
        print("note: compiled backend not importable; timing NumPy only")

    rng = np.random.default_rng(7)
    n = args.records
    # in-universe draws for the three band1 inputs: AFP, Team, ResourceLevel1
    X = np.column_stack([
        rng.uniform(0, 15000, n),
        rng.uniform(0, 50, n),
        rng.uniform(0.7, 1.0, n),
    ])
    X = np.ascontiguousarray(X)

    bench("mamdani (centroid, resolution 1001)", load_fixture("band1_mamdani"), X, args.repeats)
    bench("sugeno1 (weighted average)", load_fixture("band1_sugeno1"), X, args.repeats)


if __name__ == "__main__":
    main()
