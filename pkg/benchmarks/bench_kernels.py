"""Time the numba kernels against their pure-numpy twins.

Run as a script: python benchmarks/bench_kernels.py [--sizes N,N,...]
Each kernel runs on random disk points; numba timings exclude the first
call so JIT compilation does not pollute the numbers.
"""

import argparse
import time

import numpy as np

from conformal_lab import accel


def _random_points(rng, n):
    r = np.sqrt(rng.uniform(0.0, 0.9, size=n))
    t = rng.uniform(0.0, 2.0 * np.pi, size=n)
    return r * np.cos(t), r * np.sin(t)


def _best_of(fn, repeats=5):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_pair_distances(rng, n):
    ax, ay = _random_points(rng, n)
    bx, by = _random_points(rng, n)
    t_np = _best_of(lambda: accel.pair_distances_numpy(ax, ay, bx, by))
    if not accel.HAVE_NUMBA:
        return t_np, None
    accel.pair_distances_numba(ax, ay, bx, by)  # compile
    t_nb = _best_of(lambda: accel.pair_distances_numba(ax, ay, bx, by))
    return t_np, t_nb


def bench_tri_areas(rng, n):
    x, y = _random_points(rng, n)
    base = rng.integers(0, n - 2, size=n)
    tris = np.column_stack([base, base + 1, base + 2])
    t_np = _best_of(lambda: accel.tri_areas_numpy(x, y, tris))
    if not accel.HAVE_NUMBA:
        return t_np, None
    tris = np.ascontiguousarray(tris, dtype=np.int64)
    accel.tri_areas_numba(x, y, tris)  # compile
    t_nb = _best_of(lambda: accel.tri_areas_numba(x, y, tris))
    return t_np, t_nb


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--sizes", default="1000,10000,100000",
        help="comma-separated problem sizes",
    )
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    rng = np.random.default_rng(20240817)

    print(f"numba available: {accel.HAVE_NUMBA}")
    header = f"{'kernel':<16} {'n':>8} {'numpy':>12} {'numba':>12} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, bench in (
        ("pair_distances", bench_pair_distances),
        ("tri_areas", bench_tri_areas),
    ):
        for n in sizes:
            t_np, t_nb = bench(rng, n)
            if t_nb is None:
                print(f"{name:<16} {n:>8} {t_np * 1e3:>10.3f}ms {'-':>12} {'-':>8}")
            else:
                print(
                    f"{name:<16} {n:>8} {t_np * 1e3:>10.3f}ms "
                    f"{t_nb * 1e3:>10.3f}ms {t_np / t_nb:>7.2f}x"
                )


if __name__ == "__main__":
    main()
