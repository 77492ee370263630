"""Numba-compiled twins of the kernels in _accel.

Kept in a separate module so importing the package never requires numba;
_accel performs the guarded import and the env-flag dispatch.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def sector_triplets_nb(n_r, n_a, tau, dphi, cdiag, alpha1, s1, alpha2, s2):
    cap = 8 * n_r * n_a
    rows = np.empty(cap, dtype=np.int64)
    cols = np.empty(cap, dtype=np.int64)
    vals = np.empty(cap, dtype=np.complex128)
    m = 0
    it2 = 1.0 / tau ** 2
    ip2 = 1.0 / dphi ** 2
    for k in range(n_a):
        i = (n_r - 1) * n_a + k
        rows[m] = i; cols[m] = i; vals[m] = 1.0; m += 1
    for j in range(n_r - 1):
        i = j * n_a
        rows[m] = i; cols[m] = i; vals[m] = 1.0; m += 1
        rows[m] = i; cols[m] = j * n_a + s1; vals[m] = -alpha1; m += 1
        i = j * n_a + (n_a - 1)
        rows[m] = i; cols[m] = i; vals[m] = 1.0; m += 1
        rows[m] = i; cols[m] = j * n_a + (n_a - 1 - s2); vals[m] = -alpha2; m += 1
    for j in range(n_r - 1):
        for k in range(1, n_a - 1):
            i = j * n_a + k
            rows[m] = i; cols[m] = i; vals[m] = 2.0 * ip2 + cdiag[j]; m += 1
            rows[m] = i; cols[m] = i - 1; vals[m] = -ip2; m += 1
            rows[m] = i; cols[m] = i + 1; vals[m] = -ip2; m += 1
            if j == 0:
                rows[m] = i; cols[m] = i; vals[m] = -2.0 * it2; m += 1
                rows[m] = i; cols[m] = i + n_a; vals[m] = 5.0 * it2; m += 1
                rows[m] = i; cols[m] = i + 2 * n_a; vals[m] = -4.0 * it2; m += 1
                rows[m] = i; cols[m] = i + 3 * n_a; vals[m] = 1.0 * it2; m += 1
            else:
                rows[m] = i; cols[m] = i; vals[m] = 2.0 * it2; m += 1
                rows[m] = i; cols[m] = i - n_a; vals[m] = -it2; m += 1
                rows[m] = i; cols[m] = i + n_a; vals[m] = -it2; m += 1
    return rows[:m], cols[:m], vals[:m]


@njit(cache=True)
def ring_sq_norms_nb(values, dphi):
    n_r, n_a = values.shape
    out = np.empty(n_r)
    for j in range(n_r):
        s = 0.5 * (abs(values[j, 0]) ** 2 + abs(values[j, n_a - 1]) ** 2)
        for k in range(1, n_a - 1):
            s += abs(values[j, k]) ** 2
        out[j] = s * dphi
    return out


@njit(cache=True)
def bary_eval_batch_nb(nodes, wts, levels, lam, rr, pp):
    n = nodes.shape[0]
    L = levels.shape[0]
    N = rr.shape[0]
    out = np.empty(N, dtype=np.complex128)
    row = np.empty(n)
    for q in range(N):
        p = pp[q]
        tol = 1e-13 * max(1.0, abs(p))
        hit = -1
        for i in range(n):
            if abs(p - nodes[i]) < tol:
                hit = i
                break
        if hit >= 0:
            for i in range(n):
                row[i] = 0.0
            row[hit] = 1.0
        else:
            tot = 0.0
            for i in range(n):
                row[i] = wts[i] / (p - nodes[i])
                tot += row[i]
            for i in range(n):
                row[i] /= tot
        logr = np.log(rr[q])
        acc = 0.0 + 0.0j
        for i in range(n):
            acc += row[i] * levels[L - 1, i]
        coef = 1.0 + 0.0j
        for nn in range(1, L):
            coef *= 1j * logr / nn
            v = 0.0 + 0.0j
            for i in range(n):
                v += row[i] * levels[L - 1 - nn, i]
            acc += coef * v
        out[q] = np.exp(1j * lam * logr) * acc
    return out
