"""Weight-line solvability verdicts and corner asymptotics.

The Fredholm property on a weighted scale hinges on a single horizontal
line Im lambda = a + 1 - l - 2m being free of pencil eigenvalues.
Between two such lines, each eigenvalue contributes singular functions

    v(r, phi) = r^{i lam} sum_{n=0}^{k} (1/n!) (i ln r)^n psi^{k-n}(phi)

built from its Jordan chains; these are exactly the terms lost when a
solution's weight is improved across the strip.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor

from .errors import LineNotClean, NoConvergence, UnsupportedProblemClass
from .multiplicity import EigenRecord, jordan_system
from .nep import (NepOptions, Rectangle, _beyn_raw, _refine_raw, _sigma_min,
                  beyn_eigs, line_free)
from .pencil import (CompiledPencil, Discretization, PencilProblem,
                     compile_pencil, discretize, full_circle_from_symbol)

_TOP_INSET = 0.075       # counting rectangles stop this far below the top line
_EDGE_SPACING = 0.01     # max contour node spacing inside strip scans


@dataclass(frozen=True)
class WeightLine:
    """Weight exponent a, regularity offset l, operator order 2m."""
    a: float
    l: int
    m: int
    beta: float = field(init=False)

    def __post_init__(self):
        if self.l < 0:
            raise ValueError("l must be a nonnegative integer")
        object.__setattr__(self, "beta", self.a + 1.0 - self.l - 2 * self.m)


@dataclass(frozen=True)
class Verdict:
    status: str                       # fredholm | not_fredholm | inconclusive
    witnesses: tuple[complex, ...]
    notes: str = ""

    def __post_init__(self):
        if self.status == "not_fredholm" and not self.witnesses:
            raise ValueError("not_fredholm requires at least one witness")


@dataclass(frozen=True)
class SingularFunction:
    """One term r^{i lam} sum (i ln r)^n/n! psi^{k-n}(phi) of a chain."""
    lam: complex
    k: int
    chain_index: int
    levels: tuple[np.ndarray, ...]    # nodal psi^0..psi^k over all components
    disc: Discretization


@dataclass(frozen=True)
class TransitionReport:
    h2: float
    h1: float
    status: str                       # regularity_transfer | obstructed
    records: tuple[EigenRecord, ...]
    obstructions: tuple[SingularFunction, ...]
    re_halfwidth: float


@dataclass(frozen=True)
class AdjointReport:
    rect: Rectangle
    mapped_rect: Rectangle
    spectrum: tuple[complex, ...]
    adjoint_spectrum: tuple[complex, ...]
    hausdorff: float


def _is_local_full_circle(p: PencilProblem) -> bool:
    return (p.symbol is not None and len(p.components) == 1
            and all(r.kind == "periodic_match" for r in p.rows))


def fredholm_verdict(p: PencilProblem, d: Discretization, wl: WeightLine,
                     re_halfwidth: float = 10.0,
                     opts: NepOptions | None = None) -> Verdict:
    """Solvability verdict for the weight line of wl."""
    v = line_free(p, d, wl.beta, re_halfwidth, opts)
    where = f"line Im lambda = {wl.beta:g}, |Re lambda| <= {re_halfwidth:g}"
    if v.status == "free":
        return Verdict(status="fredholm", witnesses=(),
                       notes=f"{where} is eigenvalue-free")
    if v.status == "eigenvalue_found":
        notes = f"eigenvalue {v.eigenvalue:.12g} obstructs the {where}"
        if _is_local_full_circle(p):
            notes += "; kernel trivial, image not closed"
        return Verdict(status="not_fredholm", witnesses=(v.eigenvalue,),
                       notes=notes)
    return Verdict(status="inconclusive", witnesses=(),
                   notes=f"could not certify the {where}")


def _check_line_clean(p, d, h: float, re_halfwidth: float, opts) -> None:
    v = line_free(p, d, h, re_halfwidth, opts)
    if v.status == "eigenvalue_found":
        raise LineNotClean(h, witness=v.eigenvalue)
    if v.status != "free":
        raise LineNotClean(h)


def strip_scan(p: PencilProblem, d: Discretization, h2: float, h1: float,
               re_halfwidth: float = 10.0, opts: NepOptions | None = None
               ) -> list[EigenRecord]:
    """All eigenvalues with Im lambda in (h2, h1), with full Jordan data.

    The lower bounding line must be eigenvalue-free (LineNotClean
    otherwise); the upper line may carry spectrum, so the counting
    rectangle stops slightly below it and the remaining band is swept by
    sigma_min sampling.
    """
    if not h2 < h1:
        raise ValueError("strip requires h2 < h1")
    if re_halfwidth <= 0:
        raise ValueError("re_halfwidth must be positive")
    opts = opts or NepOptions()
    cp = compile_pencil(p, d) if not isinstance(p, CompiledPencil) else p

    _check_line_clean(cp, d, h2, re_halfwidth, opts)

    inset = min(_TOP_INSET, 0.25 * (h1 - h2))
    box = Rectangle(-re_halfwidth, re_halfwidth, h2, h1 - inset)
    eigs = [e.lam for e in _beyn_raw(cp, d, box, opts, spacing=_EDGE_SPACING)]

    # sweep the skipped band below the top line
    xs = np.linspace(-re_halfwidth, re_halfwidth, 129)
    for frac in (0.75, 0.5, 0.25):
        y = h1 - frac * inset
        sig = np.array([_sigma_min(cp.matrix(complex(x, y))) for x in xs])
        for idx in np.where(sig <= 1e-2 * max(1.0, float(sig.max())))[0]:
            try:
                lam, sigma = _refine_raw(cp, complex(xs[idx], y), opts)
            except NoConvergence:
                continue
            # open strip: a root sitting on the top line (within eigenvalue
            # resolution) belongs to the line, not the strip
            margin = 1e-6 * (1.0 + abs(h1))
            if (sigma <= opts.residual_tol and h2 < lam.imag < h1 - margin
                    and abs(lam.real) <= re_halfwidth
                    and all(abs(lam - z) > 1e-6 * (1 + abs(lam)) for z in eigs)):
                eigs.append(lam)

    eigs.sort(key=lambda z: (z.imag, z.real))
    return [jordan_system(cp, d, lam, opts) for lam in eigs]


def singular_functions(record: EigenRecord, d: Discretization
                       ) -> list[SingularFunction]:
    """All singular terms of one eigenvalue: a function per (k, chain)."""
    out = []
    for q, chain in enumerate(record.chains):
        for k in range(chain.rank):
            out.append(SingularFunction(
                lam=record.lam, k=k, chain_index=q,
                levels=tuple(chain.vectors[:k + 1]), disc=d))
    return out


def eval_singular(f: SingularFunction, point: tuple[float, float],
                  component: int = 0) -> complex:
    """Evaluate one singular term at (r, phi); phi is taken modulo 2 pi."""
    from .errors import OutOfDomain

    r, phi = point
    if r <= 0:
        raise OutOfDomain(f"r must be positive, got {r}")
    lo, hi = f.disc.intervals[component]
    # canonical ray angle: phi and phi + 2 pi k address the same ray
    if not lo <= phi <= hi:
        shift = 2.0 * np.pi * math.floor((phi - lo) / (2.0 * np.pi))
        cand = phi - shift
        if lo - 1e-12 <= cand <= hi + 1e-12:
            phi = min(max(cand, lo), hi)
        else:
            raise OutOfDomain(
                f"angle {point[1]:g} outside [{lo:g}, {hi:g}] modulo 2 pi")
    row = f.disc.interp_row(component, phi)
    n = f.disc.n_phi
    sl = slice(component * n, (component + 1) * n)
    logr = math.log(r)
    acc = 0.0 + 0.0j
    coef = 1.0 + 0.0j
    for nn in range(f.k + 1):
        if nn > 0:
            coef *= 1j * logr / nn
        acc += coef * (row @ f.levels[f.k - nn][sl])
    return complex(r ** (1j * f.lam) * acc)


def weight_transition_report(p: PencilProblem, d: Discretization,
                             w1: tuple[float, int], w2: tuple[float, int],
                             m: int, re_halfwidth: float = 10.0,
                             opts: NepOptions | None = None
                             ) -> TransitionReport:
    """Obstructions to carrying regularity from weight w1 down to w2.

    w1 = (a1, l1) and w2 = (a2, l2) define lines h_i = a_i + 1 - l_i - 2m;
    an empty strip means solutions upgrade across it unchanged, otherwise
    the report lists the singular terms that must be subtracted.
    """
    h1 = w1[0] + 1.0 - w1[1] - 2 * m
    h2 = w2[0] + 1.0 - w2[1] - 2 * m
    if not h2 < h1:
        raise ValueError("weights must define a nonempty strip (h2 < h1)")
    records = strip_scan(p, d, h2, h1, re_halfwidth, opts)
    obstructions: list[SingularFunction] = []
    for rec in records:
        obstructions.extend(singular_functions(rec, d))
    status = "regularity_transfer" if not records else "obstructed"
    return TransitionReport(h2=h2, h1=h1, status=status,
                            records=tuple(records),
                            obstructions=tuple(obstructions),
                            re_halfwidth=re_halfwidth)


# ---------------------------------------------------------------------------
# adjoint symmetry


def adjoint_pencil(p: PencilProblem) -> PencilProblem:
    """Pencil of the formally adjoint symbol (conjugated coefficients).

    Only single-component full-circle pencils built from a constant
    second-order symbol are supported; nonlocal or multi-component
    problems raise UnsupportedProblemClass.
    """
    if not _is_local_full_circle(p):
        raise UnsupportedProblemClass(
            "adjoint_pencil supports single-component full-circle pencils "
            "built from a constant symbol"
        )
    a20, a11, a02 = p.symbol
    return full_circle_from_symbol(np.conj(a20), np.conj(a11), np.conj(a02))


def _hausdorff(A: list[complex], B: list[complex]) -> float:
    if not A and not B:
        return 0.0
    if not A or not B:
        return float("inf")
    d1 = max(min(abs(a - b) for b in B) for a in A)
    d2 = max(min(abs(b - a) for a in A) for b in B)
    return max(d1, d2)


def adjoint_symmetry_check(p: PencilProblem, d: Discretization,
                           rect: Rectangle, opts: NepOptions | None = None
                           ) -> AdjointReport:
    """Spectral symmetry lambda <-> conj(lambda) - 2i(m-1) vs the adjoint.

    Extracts the spectrum of p in rect and of the adjoint pencil in the
    mirrored rectangle, maps the latter back, and reports the Hausdorff
    distance between the two finite sets (0 by convention when both are
    empty).
    """
    opts = opts or NepOptions()
    adj = adjoint_pencil(p)
    shift = 2.0 * (p.m - 1)
    mapped = Rectangle(rect.re_min, rect.re_max,
                       -rect.im_max - shift, -rect.im_min - shift)
    fwd = [e.lam for e in beyn_eigs(p, d, rect, opts)]
    d_adj = discretize(adj, d.n_phi)
    mirr = [e.lam for e in beyn_eigs(adj, d_adj, mapped, opts)]
    back = [np.conj(mu) - 1j * shift for mu in mirr]
    return AdjointReport(rect=rect, mapped_rect=mapped,
                         spectrum=tuple(sorted(fwd, key=lambda z: (z.imag, z.real))),
                         adjoint_spectrum=tuple(sorted(mirr, key=lambda z: (z.imag, z.real))),
                         hausdorff=_hausdorff(fwd, back))
