"""Times the numba kernels against their pure-numpy fallbacks.

Run as ``python benchmarks/bench_kernels.py``.  Each kernel is executed on
identical inputs through both paths; the table reports best-of-repeats
wall time and the agreement between results.  Set CORNERPENCIL_NO_NUMBA=1
to confirm the fallback wiring (the numba column then reads "n/a").
"""
import time

import numpy as np

from cornerpencil._accel import (bary_eval_batch_np, ring_sq_norms_np,
                                 sector_triplets_np)

try:
    from cornerpencil._kernels import (bary_eval_batch_nb, ring_sq_norms_nb,
                                       sector_triplets_nb)
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

REPEATS = 5


def best_of(fn, *args):
    out = fn(*args)                 # warm-up (numba compiles here)
    best = float("inf")
    for _ in range(REPEATS):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return out, best


def agreement(a, b):
    if isinstance(a, tuple):
        return max(agreement(x, y) for x, y in zip(a, b))
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        return float("inf")
    scale = max(1.0, float(np.max(np.abs(a))))
    return float(np.max(np.abs(a - b))) / scale


def triplet_args():
    n_r, n_a = 256, 257
    tau = 31 * np.log(1 / 0.7) / (n_r - 1)
    cdiag = 2.5 * np.exp(2.0 * tau * np.arange(n_r)).astype(np.complex128)
    return n_r, n_a, tau, np.pi / 2 / (n_a - 1), cdiag, 0.5 + 0j, 128, 0.5 + 0j, 128


def ring_args():
    rng = np.random.default_rng(7)
    vals = rng.standard_normal((512, 513)) + 1j * rng.standard_normal((512, 513))
    return vals, np.pi / 2 / 512


def bary_args():
    rng = np.random.default_rng(11)
    n, L, N = 48, 3, 20000
    k = np.arange(n)
    nodes = 0.25 * np.pi * (1 - np.cos(np.pi * k / (n - 1)))
    wts = np.where(k % 2 == 0, 1.0, -1.0)
    wts[0] *= 0.5
    wts[-1] *= 0.5
    levels = rng.standard_normal((L, n)) + 1j * rng.standard_normal((L, n))
    rr = rng.uniform(1e-3, 1.0, N)
    pp = rng.uniform(0.0, 0.5 * np.pi, N)
    return nodes, wts, levels, -4j / 3, rr, pp


def sort_triplets(t):
    r, c, v = t
    order = np.lexsort((c, r))
    n = int(r.max()) + 1
    dense = np.zeros((n,), dtype=object)
    # duplicate (i, j) entries are additive in COO; fold before comparing
    from collections import defaultdict
    acc = defaultdict(complex)
    for i, j, x in zip(r[order], c[order], v[order]):
        acc[(int(i), int(j))] += x
    keys = sorted(acc)
    return (np.array([k[0] for k in keys]), np.array([k[1] for k in keys]),
            np.array([acc[k] for k in keys]))


CASES = [
    ("sector_triplets", sector_triplets_np,
     sector_triplets_nb if HAVE_NUMBA else None, triplet_args(), sort_triplets),
    ("ring_sq_norms", ring_sq_norms_np,
     ring_sq_norms_nb if HAVE_NUMBA else None, ring_args(), None),
    ("bary_eval_batch", bary_eval_batch_np,
     bary_eval_batch_nb if HAVE_NUMBA else None, bary_args(), None),
]


def main():
    print(f"{'kernel':<18} {'numpy':>10} {'numba':>10} {'speedup':>8} {'max diff':>10}")
    for name, f_np, f_nb, args, canon in CASES:
        out_np, t_np = best_of(f_np, *args)
        if f_nb is None:
            print(f"{name:<18} {t_np * 1e3:>8.2f}ms {'n/a':>10} {'':>8} {'':>10}")
            continue
        out_nb, t_nb = best_of(f_nb, *args)
        a, b = (canon(out_np), canon(out_nb)) if canon else (out_np, out_nb)
        diff = agreement(a, b)
        print(f"{name:<18} {t_np * 1e3:>8.2f}ms {t_nb * 1e3:>8.2f}ms "
              f"{t_np / t_nb:>7.1f}x {diff:>10.2e}")


if __name__ == "__main__":
    main()
