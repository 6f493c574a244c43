"""Hot numeric kernels, compiled with numba when available.

Set CARDIAG_DISABLE_NUMBA=1 to force the pure-numpy fallback path (useful for
debugging and for the benchmark in benchmarks/bench_kernels.py, which times
both). The numpy and numba paths compute the same quantities; results agree to
float rounding, not bit-for-bit, because summation order differs.
"""

import math
import os

import numpy as np

_env = os.environ.get("CARDIAG_DISABLE_NUMBA", "").strip()
_DISABLED = _env not in ("", "0")

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None

NUMBA_ENABLED = njit is not None and not _DISABLED


# --- windowed-sinc resampling -------------------------------------------------

def _resample_sinc_loop(x, in_rate, out_rate, n_out, num_zeros):
    # Band-limited interpolation: Hann-windowed sinc, num_zeros zero crossings
    # per side, cutoff scaled below 1 when downsampling to suppress aliasing.
    ratio = out_rate / in_rate
    cutoff = ratio if ratio < 1.0 else 1.0
    half = num_zeros / cutoff
    n_in = x.shape[0]
    y = np.zeros(n_out)
    for n in range(n_out):
        t = n * in_rate / out_rate
        lo = int(math.ceil(t - half))
        hi = int(math.floor(t + half))
        if lo < 0:
            lo = 0
        if hi > n_in - 1:
            hi = n_in - 1
        acc = 0.0
        for m in range(lo, hi + 1):
            d = t - m
            s = cutoff * d
            if s == 0.0:
                core = 1.0
            else:
                ps = math.pi * s
                core = math.sin(ps) / ps
            w = 0.5 + 0.5 * math.cos(math.pi * d / half)
            acc += x[m] * cutoff * core * w
        y[n] = acc
    return y


def _resample_sinc_numpy(x, in_rate, out_rate, n_out, num_zeros, block=8192):
    ratio = out_rate / in_rate
    cutoff = min(ratio, 1.0)
    half = num_zeros / cutoff
    n_in = x.shape[0]
    n_taps = int(2 * half) + 2
    y = np.empty(n_out)
    for start in range(0, n_out, block):
        n = np.arange(start, min(start + block, n_out), dtype=np.float64)
        t = n * in_rate / out_rate
        m = np.ceil(t - half).astype(np.int64)[:, None] + np.arange(n_taps)
        d = t[:, None] - m
        valid = (np.abs(d) <= half) & (m >= 0) & (m <= n_in - 1)
        k = cutoff * np.sinc(cutoff * d) * (0.5 + 0.5 * np.cos(np.pi * d / half))
        k[~valid] = 0.0
        y[start : start + len(n)] = np.einsum("ij,ij->i", x[np.clip(m, 0, n_in - 1)], k)
    return y


# --- cosine similarity over unit-norm rows ------------------------------------

def _pairwise_sim_stats_loop(unit_rows):
    # Mean/min/max over all unordered pairs i<j, self-pairs excluded.
    n, dim = unit_rows.shape
    total = 0.0
    lo = np.inf
    hi = -np.inf
    for i in range(n):
        for j in range(i + 1, n):
            s = 0.0
            for c in range(dim):
                s += unit_rows[i, c] * unit_rows[j, c]
            if s > 1.0:
                s = 1.0
            elif s < -1.0:
                s = -1.0
            total += s
            if s < lo:
                lo = s
            if s > hi:
                hi = s
    pairs = n * (n - 1) // 2
    return total / pairs, lo, hi


def _pairwise_sim_stats_numpy(unit_rows):
    n = unit_rows.shape[0]
    gram = unit_rows @ unit_rows.T
    vals = np.clip(gram[np.triu_indices(n, k=1)], -1.0, 1.0)
    return float(vals.mean()), float(vals.min()), float(vals.max())


def _cosine_scores_loop(unit_query, unit_rows):
    n, dim = unit_rows.shape
    out = np.empty(n)
    for i in range(n):
        s = 0.0
        for c in range(dim):
            s += unit_rows[i, c] * unit_query[c]
        if s > 1.0:
            s = 1.0
        elif s < -1.0:
            s = -1.0
        out[i] = s
    return out


def _cosine_scores_numpy(unit_query, unit_rows):
    return np.clip(unit_rows @ unit_query, -1.0, 1.0)


if NUMBA_ENABLED:
    _resample_sinc_jit = njit(cache=True)(_resample_sinc_loop)
    _pairwise_sim_stats_jit = njit(cache=True)(_pairwise_sim_stats_loop)
    _cosine_scores_jit = njit(cache=True)(_cosine_scores_loop)


def resample_sinc(x, in_rate, out_rate, n_out, num_zeros):
    """Resample float64 samples x from in_rate to out_rate (n_out samples)."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if NUMBA_ENABLED:
        return _resample_sinc_jit(x, float(in_rate), float(out_rate), n_out, num_zeros)
    return _resample_sinc_numpy(x, float(in_rate), float(out_rate), n_out, num_zeros)


def pairwise_sim_stats(unit_rows):
    """(mean, min, max) cosine similarity over all row pairs of a unit-norm matrix."""
    unit_rows = np.ascontiguousarray(unit_rows, dtype=np.float64)
    if NUMBA_ENABLED:
        return _pairwise_sim_stats_jit(unit_rows)
    return _pairwise_sim_stats_numpy(unit_rows)


def cosine_scores(unit_query, unit_rows):
    """Cosine similarity of one unit vector against each unit-norm row."""
    unit_query = np.ascontiguousarray(unit_query, dtype=np.float64)
    unit_rows = np.ascontiguousarray(unit_rows, dtype=np.float64)
    if NUMBA_ENABLED:
        return _cosine_scores_jit(unit_query, unit_rows)
    return _cosine_scores_numpy(unit_query, unit_rows)


def warmup():
    """Trigger JIT compilation so first-request latency stays flat."""
    x = np.zeros(64)
    resample_sinc(x, 48000.0, 16000.0, 21, 16)
    rows = np.eye(3)
    pairwise_sim_stats(rows)
    cosine_scores(rows[0], rows)
