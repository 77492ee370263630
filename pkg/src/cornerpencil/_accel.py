"""Kernel dispatch: numba-compiled hot loops with pure-numpy fallbacks.

Set ``CORNERPENCIL_NO_NUMBA=1`` to force the numpy path (or simply do not
install numba).  Both paths compute identical results; the numba versions
exist because grid assembly and batched evaluations dominate the sector
solver's runtime at fine resolutions.
"""
from __future__ import annotations

import os

import numpy as np

__all__ = [
    "USING_NUMBA",
    "sector_triplets",
    "ring_sq_norms",
    "bary_eval_batch",
]

_DISABLED = os.environ.get("CORNERPENCIL_NO_NUMBA", "") not in ("", "0")


def sector_triplets_np(n_r: int, n_a: int, tau: float, dphi: float,
                       cdiag: np.ndarray, alpha1: complex, s1: int,
                       alpha2: complex, s2: int):
    """COO triplets of the log-polar FD matrix.

    Row layout: Dirichlet on the outer ring, matching rows on the two
    sides, centered second differences elsewhere; the innermost ring
    closes the radial stencil one-sidedly (there is no node at r = 0).
    cdiag holds c*e^{2t} per radial level.
    """
    rows, cols, vals = [], [], []

    def put(i, j, v):
        rows.append(i)
        cols.append(j)
        vals.append(v)

    it2 = 1.0 / tau ** 2
    ip2 = 1.0 / dphi ** 2
    for k in range(n_a):
        i = (n_r - 1) * n_a + k
        put(i, i, 1.0)
    for j in range(n_r - 1):
        i = j * n_a
        put(i, i, 1.0)
        put(i, j * n_a + s1, -alpha1)
        i = j * n_a + (n_a - 1)
        put(i, i, 1.0)
        put(i, j * n_a + (n_a - 1 - s2), -alpha2)
    for j in range(n_r - 1):
        for k in range(1, n_a - 1):
            i = j * n_a + k
            put(i, i, 2.0 * ip2 + cdiag[j])
            put(i, i - 1, -ip2)
            put(i, i + 1, -ip2)
            if j == 0:
                put(i, i, -2.0 * it2)
                put(i, i + n_a, 5.0 * it2)
                put(i, i + 2 * n_a, -4.0 * it2)
                put(i, i + 3 * n_a, 1.0 * it2)
            else:
                put(i, i, 2.0 * it2)
                put(i, i - n_a, -it2)
                put(i, i + n_a, -it2)
    return (np.asarray(rows, dtype=np.int64),
            np.asarray(cols, dtype=np.int64),
            np.asarray(vals, dtype=np.complex128))


def ring_sq_norms_np(values: np.ndarray, dphi: float) -> np.ndarray:
    """Angular trapezoid of |u|^2 per radial ring."""
    sq = np.abs(values) ** 2
    w = np.full(values.shape[1], dphi)
    w[0] = w[-1] = 0.5 * dphi
    return sq @ w


def bary_eval_batch_np(nodes: np.ndarray, wts: np.ndarray,
                       levels: np.ndarray, lam: complex,
                       rr: np.ndarray, pp: np.ndarray) -> np.ndarray:
    """Evaluate r^{i lam} sum_n (i ln r)^n/n! psi^{L-1-n}(phi) pointwise.

    levels has shape (L, n) with levels[s] the level-s angular profile
    sampled on the collocation nodes; rr and pp are flat point batches.
    """
    diff = pp[:, None] - nodes[None, :]
    hit = np.abs(diff) < 1e-13 * np.maximum(1.0, np.abs(pp))[:, None]
    diff = np.where(hit, 1.0, diff)
    frac = wts[None, :] / diff
    frac = np.where(hit, 1.0, frac)
    anyhit = hit.any(axis=1)
    frac[anyhit] *= hit[anyhit]
    row = frac / frac.sum(axis=1)[:, None]

    L = levels.shape[0]
    logr = np.log(rr)
    vals = row @ levels.T                     # (N, L) profile values
    acc = vals[:, L - 1].astype(np.complex128)
    coef = np.ones(len(rr), dtype=np.complex128)
    for nn in range(1, L):
        coef *= 1j * logr / nn
        acc = acc + coef * vals[:, L - 1 - nn]
    return np.exp(1j * lam * logr) * acc


if not _DISABLED:
    try:
        from ._kernels import (sector_triplets_nb, ring_sq_norms_nb,
                               bary_eval_batch_nb)
        USING_NUMBA = True
    except ImportError:
        USING_NUMBA = False
else:
    USING_NUMBA = False

if USING_NUMBA:
    sector_triplets = sector_triplets_nb
    ring_sq_norms = ring_sq_norms_nb
    bary_eval_batch = bary_eval_batch_nb
else:
    sector_triplets = sector_triplets_np
    ring_sq_norms = ring_sq_norms_np
    bary_eval_batch = bary_eval_batch_np
