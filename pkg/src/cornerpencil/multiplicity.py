"""Jordan chains and partial multiplicities at a pencil eigenvalue.

A chain psi^0..psi^{p-1} satisfies, level by level,

    sum_{s=0}^{j} (1/s!) T^(s)(lambda) psi^{j-s} = 0,      j = 0..p-1.

Extending a chain by one level means solving T psi^j = -rhs with
rhs = sum_{s>=1} (1/s!) T^(s) psi^{j-s}; this is solvable exactly when
rhs is orthogonal to the left nullspace.  Since psi^{j-1} is free modulo
the right nullspace, the obstruction is first reduced against that
freedom before the chain is declared terminated.  Associated vectors may
legitimately be zero and are kept.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotAnEigenvalue
from .nep import NepOptions
from .pencil import CompiledPencil, Discretization, PencilProblem, compile_pencil

_MAX_RANK = 12


@dataclass(frozen=True)
class JordanChain:
    vectors: tuple[np.ndarray, ...]
    rank: int

    def __post_init__(self):
        if self.rank != len(self.vectors) or self.rank < 1:
            raise ValueError("rank must equal the number of chain vectors")


@dataclass(frozen=True)
class EigenRecord:
    lam: complex
    geometric_mult: int
    chains: tuple[JordanChain, ...]
    algebraic_mult: int


def _compiled(p: PencilProblem, d: Discretization) -> CompiledPencil:
    return p if isinstance(p, CompiledPencil) else compile_pencil(p, d)


def _null_pair(T: np.ndarray, tol: float, lam: complex):
    """Right and left numerical nullspaces of T with the sigma gate."""
    U, s, Vh = np.linalg.svd(T)
    if s[-1] > tol:
        raise NotAnEigenvalue(lam, float(s[-1]), tol)
    member = s <= tol * s[0]
    q = int(np.sum(member))
    E = Vh[len(s) - q:].conj().T          # n x q, orthonormal columns
    L = U[:, len(s) - q:]                 # left nullspace, orthonormal
    return E, L


def nullspace(p: PencilProblem, d: Discretization, lam: complex,
              tol: float | None = None) -> list[np.ndarray]:
    """Orthonormal basis of ker T(lambda); raises NotAnEigenvalue otherwise."""
    if tol is None:
        tol = NepOptions().residual_tol
    cp = _compiled(p, d)
    E, _ = _null_pair(cp.matrix(lam), tol, lam)
    return [E[:, j].copy() for j in range(E.shape[1])]


def jordan_system(p: PencilProblem, d: Discretization, lam: complex,
                  opts: NepOptions | None = None) -> EigenRecord:
    """Canonical system of Jordan chains at an accepted eigenvalue.

    The eigenbasis is rotated by the SVD of the level-1 obstruction map
    L^H T' E so that extendable directions come first, then each
    direction is extended greedily until its solvability test fails.
    """
    opts = opts or NepOptions()
    tol = opts.residual_tol
    cp = _compiled(p, d)
    T0 = cp.matrix(lam)
    E, L = _null_pair(T0, tol, lam)
    q = E.shape[1]

    fact = [1.0]
    derivs: list[np.ndarray] = []

    def T_s(s: int) -> np.ndarray:
        while len(derivs) < s:
            k = len(derivs) + 1
            fact.append(fact[-1] * k)
            derivs.append(cp.derivative(lam, k) / fact[k])
        return derivs[s - 1]

    S1 = L.conj().T @ (T_s(1) @ E)        # level-1 obstruction map, q x q
    U1, sig1, V1h = np.linalg.svd(S1)
    # ascending obstruction: near-null directions of S1 extend past level 1
    basis = (E @ V1h.conj().T)[:, ::-1]

    # a located eigenvalue is only accurate to O(residual_tol^(1/m)), which
    # leaks into the obstruction at the same order; obstructions below this
    # absolute floor are treated as zero (the rhs-relative test alone would
    # terminate every chain of a slightly mislocated multiple eigenvalue)
    solv_floor = 100.0 * tol * (1.0 + abs(lam))

    # pseudo-inverse of S1 with the same noise floor: correcting against
    # noise-level directions would fake solvability with huge coefficients
    keep = sig1 > solv_floor
    S1_pinv = (V1h.conj().T[:, keep] / sig1[keep][None, :]) @ U1[:, keep].conj().T

    chains = []
    for j in range(q):
        psi = [basis[:, j] / np.linalg.norm(basis[:, j])]
        while len(psi) < _MAX_RANK:
            lvl = len(psi)
            rhs = sum(T_s(s) @ psi[lvl - s] for s in range(1, lvl + 1))
            obstruction = L.conj().T @ rhs
            threshold = max(tol * float(np.linalg.norm(rhs)), solv_floor)
            if lvl >= 2:
                # spend the nullspace freedom in psi^{lvl-1} first
                beta = S1_pinv @ obstruction
                if np.linalg.norm(obstruction - S1 @ beta) <= threshold:
                    psi[lvl - 1] = psi[lvl - 1] - E @ beta
                    rhs = sum(T_s(s) @ psi[lvl - s] for s in range(1, lvl + 1))
                else:
                    break
            elif np.linalg.norm(obstruction) > threshold:
                break
            nxt, *_ = np.linalg.lstsq(T0, -rhs, rcond=None)
            psi.append(nxt)
        chains.append(JordanChain(vectors=tuple(psi), rank=len(psi)))

    chains.sort(key=lambda c: -c.rank)
    return EigenRecord(lam=complex(lam), geometric_mult=q,
                       chains=tuple(chains),
                       algebraic_mult=sum(c.rank for c in chains))
