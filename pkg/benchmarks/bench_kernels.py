"""Compare the jitted kernels against their pure-numpy fallbacks.

Run:  python3 benchmarks/bench_kernels.py [--repeats N]
The same module-level kernels power both paths, so the numbers here are the
whole story of what CARDIAG_DISABLE_NUMBA costs.
"""

import argparse
import time

import numpy as np

from cardiag import _accel


def _time(fn, *args, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_resample(repeats):
    rng = np.random.default_rng(0)
    x = rng.uniform(-0.9, 0.9, 44100 * 10)  # 10 s at 44.1 kHz
    n_out = int(round(len(x) * 16000 / 44100))
    args = (x, 44100, 16000, n_out, 16)
    rows = []
    if _accel.NUMBA_ENABLED:
        _accel.resample_sinc(*args)  # compile before timing
        rows.append(("numba", _time(_accel.resample_sinc, *args, repeats=repeats)))
    rows.append(("numpy", _time(_accel._resample_sinc_numpy, *args, repeats=repeats)))
    return "resample 10 s 44.1k->16k", rows


def _bench_pairwise_at(n, repeats):
    rng = np.random.default_rng(1)
    rows_ = rng.standard_normal((n, 128))
    rows_ /= np.linalg.norm(rows_, axis=1, keepdims=True)
    rows = []
    if _accel.NUMBA_ENABLED:
        _accel.pairwise_sim_stats(rows_)
        rows.append(("numba", _time(_accel.pairwise_sim_stats, rows_, repeats=repeats)))
    rows.append(("numpy", _time(_accel._pairwise_sim_stats_numpy, rows_, repeats=repeats)))
    return f"pairwise stats {n}x128", rows


def bench_pairwise_production(repeats):
    return _bench_pairwise_at(65, repeats)  # the shipped dataset size


def bench_pairwise_stress(repeats):
    return _bench_pairwise_at(2000, repeats)


def bench_cosine(repeats):
    rng = np.random.default_rng(2)
    mat = rng.standard_normal((5000, 128))
    mat /= np.linalg.norm(mat, axis=1, keepdims=True)
    q = rng.standard_normal(128)
    q /= np.linalg.norm(q)
    rows = []
    if _accel.NUMBA_ENABLED:
        _accel.cosine_scores(q, mat)
        rows.append(("numba", _time(_accel.cosine_scores, q, mat, repeats=repeats)))
    rows.append(("numpy", _time(_accel._cosine_scores_numpy, q, mat, repeats=repeats)))
    return "cosine scores 5000x128", rows


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    print(f"numba path: {'enabled' if _accel.NUMBA_ENABLED else 'DISABLED'}")
    for bench in (bench_resample, bench_pairwise_production,
                  bench_pairwise_stress, bench_cosine):
        name, rows = bench(args.repeats)
        print(f"\n{name}")
        baseline = rows[-1][1]
        for label, seconds in rows:
            speedup = baseline / seconds
            print(f"  {label:<6} {seconds * 1000:8.2f} ms   {speedup:5.2f}x vs numpy")


if __name__ == "__main__":
    main()
