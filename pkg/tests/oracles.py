"""Independent oracles for the test suite.

Everything here is computed from first principles with plain cmath/numpy,
deliberately sharing no code with the package: exact eigenvalue formulas
for separable problems, a 2x2 transcendental determinant root finder for
the two-trace sector conditions, and finite-difference harmonicity checks.
"""
import cmath
import math

import numpy as np

# Frozen reference roots (values asserted against the generators below
# before any package comparison uses them).
EX21_VIOLATING_MU = 0.9202138246504636   # (pi/2, 0.75, 0.75) leading decay rate
EX21_COMPLIANT_MU = 4.0 / 3.0            # (pi/2, 0.50, 0.50) leading decay rate


def dirichlet_lams(d: float, kmax: int) -> list[complex]:
    """Pencil spectrum of -phi'' + lam^2 phi with phi(0) = phi(d) = 0."""
    out = [complex(0.0, k * math.pi / d) for k in range(-kmax, kmax + 1)
           if k != 0]
    return sorted(out, key=lambda z: (z.imag, z.real))


def two_trace_det(lam: complex, d: float, a1: float, a2: float) -> complex:
    """det of the 2x2 system for phi'' = lam^2 phi under the trace rows
    phi(0) = a1 phi(d/2), phi(d) = a2 phi(d/2), in the basis e^{+-lam phi}."""
    ep = cmath.exp(lam * d / 2)
    em = 1.0 / ep
    return ((1 - a1 * ep) * (em * em - a2 * em)
            - (1 - a1 * em) * (ep * ep - a2 * ep))


def two_trace_root(d: float, a1: float, a2: float, lam0: complex,
                   steps: int = 60) -> complex:
    """Newton root of two_trace_det from lam0 (central-difference slope)."""
    lam = complex(lam0)
    h = 1e-6
    for _ in range(steps):
        f = two_trace_det(lam, d, a1, a2)
        fp = (two_trace_det(lam + h, d, a1, a2)
              - two_trace_det(lam - h, d, a1, a2)) / (2 * h)
        step = f / fp
        lam -= step
        if abs(step) < 1e-13 * (1 + abs(lam)):
            break
    return lam


def symmetric_trace_mu(d: float, alpha: float) -> float:
    """Even-mode decay rate: cos(mu d/2) = alpha with phi = cos(mu(phi-d/2))."""
    return 2.0 * math.acos(alpha) / d


def fd_laplacian(fn, x: float, y: float, h: float = 1e-4) -> complex:
    """Five-point Cartesian Laplacian of fn(x, y)."""
    return (fn(x + h, y) + fn(x - h, y) + fn(x, y + h) + fn(x, y - h)
            - 4.0 * fn(x, y)) / h ** 2


def subspace_gap(vectors: np.ndarray, basis: np.ndarray) -> float:
    """Largest principal-angle sine between span(vectors) and span(basis).

    Columns are the spanning sets; both spans must have equal dimension
    for a zero gap to mean equality.
    """
    Q1, _ = np.linalg.qr(vectors)
    Q2, _ = np.linalg.qr(basis)
    s = np.linalg.svd(Q2.conj().T @ Q1, compute_uv=False)
    return float(np.sqrt(max(0.0, 1.0 - np.min(s) ** 2)))
