"""Compare the compiled and pure kernel backends on realistic workloads.

Run from the repository root:

    python3 benchmarks/bench_kernels.py [--repeats N] [--rays N]

Sizes default to one session's worth of gaze data (ten 30 s trials at
120 Hz) against ten AOI centers, which is the shape the pipeline feeds
the kernels.  Results also confirm the two backends return bit-identical
outputs on the benchmark inputs.
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from hazsync._kernels import available_backends, get_backend


def make_inputs(n_rays: int, seed: int = 7):
    rng = np.random.default_rng(seed)
    origins = np.zeros((n_rays, 3))
    directions = rng.normal(size=(n_rays, 3))
    centers = rng.uniform(-10.0, 10.0, size=(10, 3))
    cos_half = math.cos(math.radians(2.0))
    times = np.arange(n_rays) / 120.0
    press_times = np.sort(rng.uniform(0.0, times[-1], 64))
    return origins, directions, centers, cos_half, times, press_times


def bench(fn, repeats: int):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5, help="timing repeats (best-of)")
    parser.add_argument("--rays", type=int, default=36_000, help="gaze samples per workload")
    args = parser.parse_args()

    backends = available_backends()
    if backends == ["pure"]:
        print("note: compiled backend unavailable, timing pure only")

    origins, directions, centers, cos_half, times, press_times = make_inputs(args.rays)

    workloads = {}
    for name in backends:
        mod = get_backend(name)
        ids, dists = mod.cast_rays(origins, directions, centers, cos_half)
        workloads[name] = {
            "cast_rays": lambda m=mod: m.cast_rays(origins, directions, centers, cos_half),
            "segment_runs": lambda m=mod, i=ids: m.segment_runs(i, times, 0.1),
            "latest_in_window": lambda m=mod, i=ids: m.latest_in_window(
                press_times, times[i >= 0], 1.0
            ),
        }

    print(f"{args.rays} rays x {centers.shape[0]} centers, best of {args.repeats}")
    header = f"{'kernel':<18}" + "".join(f"{name:>12}" for name in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    results = {}
    for kernel in ("cast_rays", "segment_runs", "latest_in_window"):
        row = f"{kernel:<18}"
        timings = {}
        for name in backends:
            elapsed, result = bench(workloads[name][kernel], args.repeats)
            timings[name] = elapsed
            results[(kernel, name)] = result
            row += f"{elapsed * 1e3:>10.2f}ms"
        if len(backends) == 2:
            row += f"{timings['pure'] / timings['native']:>9.1f}x"
        print(row)

    if len(backends) == 2:
        same = True
        for kernel in ("cast_rays", "segment_runs", "latest_in_window"):
            a = results[(kernel, "pure")]
            b = results[(kernel, "native")]
            a = a if isinstance(a, tuple) else (a,)
            b = b if isinstance(b, tuple) else (b,)
            for x, y in zip(a, b):
                # miss distances are nan; compare their bit patterns
                x, y = np.asarray(x), np.asarray(y)
                same &= np.array_equal(x.view(np.uint8), y.view(np.uint8))
        print(f"backend outputs bit-identical: {same}")
        if not same:
            return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
