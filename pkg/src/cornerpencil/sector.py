"""Finite-difference solver on truncated plane sectors with nonlocal sides.

Cross-validates the pencil predictions: solves -Delta u + c u = f on
0 < r < R, 0 < phi < d with side conditions u(side) = alpha * u(side
rotated into the interior), extracts vertex exponents from ring norms,
and scans the parameter resolvent.  The radial grid is geometric toward
the vertex (no node at r = 0), which turns the operator into constant
coefficients in log-polar coordinates:

    -u_tt - u_phiphi + c e^{2t} u = e^{2t} f,   t = ln r.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ._accel import bary_eval_batch, ring_sq_norms, sector_triplets
from .errors import GridShiftMismatch, SingularSystem

__all__ = [
    "SectorProblem2D",
    "PolarGrid",
    "GridSolution",
    "solve_sector",
    "grid_function",
    "manufactured_case",
    "convergence_study",
    "RateRecord",
    "fit_exponent",
    "resolvent_scan",
    "ResolventScan",
    "weighted_norm",
    "ring_norms",
    "refine_grid",
]

# all grids share the innermost radius of the 32-level reference grid, so
# refining n_r improves resolution instead of deepening the domain
_ANCHOR_LEVELS = 32


@dataclass(frozen=True)
class SectorProblem2D:
    """Second-order problem -Delta u + c u = f on a truncated sector.

    sides holds one (alpha, shift) pair per side; shift is the angle,
    measured into the interior, at which the side trace is matched:
    u(0) = alpha1 u(shift1) and u(d) = alpha2 u(d - shift2).  r0 marks
    the inner radius below which exponent fits should not reach.
    """
    d: float
    R: float = 1.0
    r0: float = 1e-3
    c: complex = 0.0
    sides: tuple[tuple[float, float], tuple[float, float]] = ()
    rhs: Callable[[float, float], complex] | None = None
    dirichlet: Callable[[float], complex] | None = None

    def __post_init__(self):
        if not 0.0 < self.d < 2.0 * math.pi:
            raise ValueError(f"opening d must lie in (0, 2 pi), got {self.d}")
        if self.R <= 0:
            raise ValueError("outer radius R must be > 0")
        if not 0.0 < self.r0 < self.R:
            raise ValueError("inner cutoff r0 must lie in (0, R)")
        if len(self.sides) != 2:
            raise ValueError("exactly one (alpha, shift) pair per side")
        for alpha, shift in self.sides:
            if not 0.0 < shift < self.d:
                raise ValueError(
                    f"shift must point into the interior (0, d), got {shift}")


@dataclass(frozen=True)
class PolarGrid:
    """Log-uniform radial levels and uniform angular nodes; no r = 0 node.

    The innermost radius is anchored to R * rho_g**(_ANCHOR_LEVELS - 1)
    regardless of n_r, so a 32-level grid is exactly geometric with ratio
    rho_g and refined grids subdivide the same domain.  r_span overrides
    the anchoring with an explicit radial interval (annulus quadrature,
    exponent-fit windows).
    """
    n_r: int
    n_a: int
    rho_g: float = 0.7
    r_span: tuple[float, float] | None = None

    def __post_init__(self):
        if self.n_r < 4:
            raise ValueError("need n_r >= 4 for the one-sided vertex closure")
        if self.n_a < 3:
            raise ValueError("need n_a >= 3")
        if not 0.0 < self.rho_g < 1.0:
            raise ValueError("grading ratio rho_g must lie in (0, 1)")
        if self.r_span is not None and not 0.0 < self.r_span[0] < self.r_span[1]:
            raise ValueError("r_span must be an increasing positive pair")

    def radii(self, R: float) -> np.ndarray:
        if self.r_span is not None:
            lo, hi = self.r_span
        else:
            lo, hi = R * self.rho_g ** (_ANCHOR_LEVELS - 1), R
        return np.geomspace(lo, hi, self.n_r)

    def angles(self, d: float) -> np.ndarray:
        return np.linspace(0.0, d, self.n_a)

    def shift_steps(self, d: float, shift: float) -> int:
        """Shift expressed in angular grid steps; must land on a grid line."""
        dphi = d / (self.n_a - 1)
        s = shift / dphi
        if abs(s - round(s)) > 1e-9 or not 1 <= round(s) <= self.n_a - 1:
            raise GridShiftMismatch(
                f"shift {shift:g} is {s:.6f} angular steps (dphi = {dphi:g}); "
                "choose n_a so every shift lands on a grid line"
            )
        return int(round(s))


@dataclass(frozen=True)
class GridSolution:
    """Nodal values (n_r x n_a) plus the realized mesh and solve stats."""
    values: np.ndarray
    rs: np.ndarray
    phis: np.ndarray
    residual: float
    cond_estimate: float
    stats: dict


def _quad_weights(rs: np.ndarray, phis: np.ndarray):
    """Node weights for integral f r dr dphi: midpoint cells in ln r
    (half cells at the ends), trapezoid in phi."""
    t = np.log(rs)
    tau = t[1] - t[0]
    wr = np.full(len(rs), tau)
    wr[0] = wr[-1] = 0.5 * tau
    wr *= rs ** 2                     # r dr = e^{2t} dt
    dphi = phis[1] - phis[0]
    wp = np.full(len(phis), dphi)
    wp[0] = wp[-1] = 0.5 * dphi
    return wr, wp


def _l2(sol_values: np.ndarray, rs: np.ndarray, phis: np.ndarray) -> float:
    wr, wp = _quad_weights(rs, phis)
    return float(np.sqrt(wr @ np.abs(sol_values) ** 2 @ wp))


def solve_sector(sp2: SectorProblem2D, grid: PolarGrid) -> GridSolution:
    """Direct sparse solve of the log-polar finite-difference system.

    Side rows hold exactly (the shift lands on a grid line), the outer
    ring carries the Dirichlet data, and the innermost ring closes the
    radial stencil one-sidedly.
    """
    rs = grid.radii(sp2.R)
    phis = grid.angles(sp2.d)
    t = np.log(rs)
    tau = float(t[1] - t[0])
    dphi = float(phis[1] - phis[0])
    (alpha1, shift1), (alpha2, shift2) = sp2.sides
    s1 = grid.shift_steps(sp2.d, shift1)
    s2 = grid.shift_steps(sp2.d, shift2)

    n_r, n_a = grid.n_r, grid.n_a
    cdiag = np.asarray(sp2.c * rs ** 2, dtype=np.complex128)
    rows, cols, vals = sector_triplets(
        n_r, n_a, tau, dphi, cdiag,
        complex(alpha1), s1, complex(alpha2), s2)
    A = sp.coo_matrix((vals, (rows, cols)), shape=(n_r * n_a, n_r * n_a)).tocsc()

    b = np.zeros(n_r * n_a, dtype=np.complex128)
    if sp2.rhs is not None:
        RR, PP = np.meshgrid(rs[:-1], phis[1:-1], indexing="ij")
        f = np.asarray(sp2.rhs(RR, PP), dtype=np.complex128)
        b.reshape(n_r, n_a)[:-1, 1:-1] = (rs[:-1] ** 2)[:, None] * f
    if sp2.dirichlet is not None:
        g = np.asarray(sp2.dirichlet(phis), dtype=np.complex128)
        b[(n_r - 1) * n_a:] = g

    try:
        lu = spla.splu(A)
        x = lu.solve(b)
    except RuntimeError as err:
        raise SingularSystem(
            f"factorization failed ({err}); 1-norm of the matrix is "
            f"{spla.onenormest(A):.3e}"
        ) from None

    inv = spla.LinearOperator(A.shape, matvec=lu.solve,
                              rmatvec=lambda v: lu.solve(v, trans="H"),
                              dtype=np.complex128)
    cond = float(spla.onenormest(A) * spla.onenormest(inv))
    resid = float(np.linalg.norm(A @ x - b))
    if not np.all(np.isfinite(x)) or resid > 1e-10 * max(1.0, float(np.linalg.norm(b))):
        raise SingularSystem(
            f"solve residual {resid:.3e} exceeds tolerance; condition "
            f"estimate {cond:.3e}"
        )
    stats = {"method": "splu", "n": n_r * n_a, "nnz": int(A.nnz),
             "factor_nnz": int(lu.nnz)}
    return GridSolution(values=x.reshape(n_r, n_a), rs=rs, phis=phis,
                        residual=resid, cond_estimate=cond, stats=stats)


def grid_function(sp2: SectorProblem2D, grid: PolarGrid,
                  fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
                  ) -> GridSolution:
    """Sample an explicit function on the grid (for fits and norms)."""
    rs = grid.radii(sp2.R)
    phis = grid.angles(sp2.d)
    RR, PP = np.meshgrid(rs, phis, indexing="ij")
    vals = np.asarray(fn(RR, PP), dtype=np.complex128)
    return GridSolution(values=vals, rs=rs, phis=phis, residual=0.0,
                        cond_estimate=float("nan"), stats={"method": "sampled"})


# ---------------------------------------------------------------------------
# manufactured cases


def _compliant_profile(d: float, alpha1: float, alpha2: float):
    """w(phi) = sin 2phi + a cos 2phi + b satisfying both side rows.

    The two matching conditions w(0) = alpha1 w(d/2) and
    w(d) = alpha2 w(d/2) are linear in (a, b); solving the 2x2 system
    makes u = r^2 w(phi) satisfy the nonlocal rows identically in r.
    """
    mid_s, mid_c = math.sin(d), math.cos(d)
    M = np.array([
        [1.0 - alpha1 * mid_c, 1.0 - alpha1],
        [math.cos(2 * d) - alpha2 * mid_c, 1.0 - alpha2],
    ])
    rhs = np.array([alpha1 * mid_s - 0.0, alpha2 * mid_s - math.sin(2 * d)])
    a, b = np.linalg.solve(M, rhs)

    def w(phi):
        return np.sin(2 * np.asarray(phi)) + a * np.cos(2 * np.asarray(phi)) + b

    def w2(phi):
        return -4.0 * np.sin(2 * np.asarray(phi)) - 4.0 * a * np.cos(2 * np.asarray(phi))

    return w, w2, float(a), float(b)


@functools.lru_cache(maxsize=8)
def _leading_singular(d: float, alpha1: float, alpha2: float, n_phi: int = 48):
    """Dominant singular term of the matching pencil in Im lambda (-3, -1)."""
    from .pencil import builtin_problem, discretize
    from .report import singular_functions, strip_scan

    p = builtin_problem("ex21_sector",
                        {"d": d, "alpha1": alpha1, "alpha2": alpha2})
    disc = discretize(p, n_phi)
    recs = strip_scan(p, disc, -3.0, -1.0, re_halfwidth=5.0)
    if not recs:
        raise ValueError("no pencil eigenvalue in the strip Im lambda in (-3, -1)")
    rec = max(recs, key=lambda r: r.lam.imag)
    return singular_functions(rec, disc)[0], rec.lam


def _singular_part_evaluator(sf):
    nodes = sf.disc.nodes[0]
    wts = sf.disc._weights
    levels = np.asarray(sf.levels)[:, :sf.disc.n_phi]

    def u_sing(r, phi):
        r = np.asarray(r, dtype=float)
        phi = np.asarray(phi, dtype=float)
        rr, pp = np.broadcast_arrays(r, phi)
        out = bary_eval_batch(nodes, wts, levels, complex(sf.lam),
                              rr.ravel().astype(float),
                              pp.ravel().astype(float))
        return out.real.reshape(rr.shape)

    return u_sing


def manufactured_case(name: str, d: float = math.pi / 2,
                      alphas: tuple[float, float] = (0.5, 0.5)):
    """Problem with a known exact solution compatible with the side rows.

    smooth_compliant: u = r^2 w(phi) with the profile w solved from the
    side conditions, so errors measure pure interior accuracy.
    singular_leading adds the real part of the dominant pencil singular
    function, whose vertex exponent the graded grid must resolve.
    Returns (SectorProblem2D, exact evaluator).
    """
    a1, a2 = alphas
    shift = d / 2.0
    w, w2, _, _ = _compliant_profile(d, a1, a2)

    if name == "smooth_compliant":
        def exact(r, phi):
            return np.asarray(r) ** 2 * w(phi)

        def rhs(r, phi):
            return -(4.0 * w(phi) + w2(phi)) * np.ones_like(np.asarray(r))

        prob = SectorProblem2D(
            d=d, R=1.0, r0=1e-3, c=0.0,
            sides=((a1, shift), (a2, shift)),
            rhs=rhs, dirichlet=lambda phi: exact(1.0, phi))
        return prob, exact

    if name == "singular_leading":
        sf, _ = _leading_singular(d, a1, a2)
        u_sing = _singular_part_evaluator(sf)

        def exact(r, phi):
            return u_sing(r, phi) + np.asarray(r) ** 2 * w(phi)

        def rhs(r, phi):
            # the singular part is annihilated by the operator
            return -(4.0 * w(phi) + w2(phi)) * np.ones_like(np.asarray(r))

        prob = SectorProblem2D(
            d=d, R=1.0, r0=1e-3, c=0.0,
            sides=((a1, shift), (a2, shift)),
            rhs=rhs, dirichlet=lambda phi: exact(1.0, phi))
        return prob, exact

    raise ValueError(f"unknown manufactured case {name!r}")


@dataclass(frozen=True)
class RateRecord:
    name: str
    shapes: tuple[tuple[int, int], ...]
    l2_errors: tuple[float, ...]
    max_errors: tuple[float, ...]
    l2_order: float | None
    max_order: float | None
    note: str = ""


def convergence_study(name: str, grids: Sequence[PolarGrid]) -> RateRecord:
    """Errors against the exact evaluator over a doubling family of grids.

    Orders are least-squares slopes of log2(error) against the refinement
    index.  The degenerate name "zero" solves the trivial problem and
    reports the order as not applicable.
    """
    if len(grids) < 3:
        raise ValueError("need at least 3 grids")
    for g0, g1 in zip(grids, grids[1:]):
        if g1.n_r != 2 * g0.n_r or (g1.n_a - 1) != 2 * (g0.n_a - 1):
            raise ValueError(
                "each grid must refine the previous by 2x in both directions")

    if name == "zero":
        prob = SectorProblem2D(d=math.pi / 2, sides=((0.0, math.pi / 4),
                                                     (0.0, math.pi / 4)))
        exact = lambda r, phi: np.zeros_like(np.asarray(r), dtype=complex)
    else:
        prob, exact = manufactured_case(name)

    l2s, maxs, shapes = [], [], []
    scale = 0.0
    for g in grids:
        sol = solve_sector(prob, g)
        RR, PP = np.meshgrid(sol.rs, sol.phis, indexing="ij")
        diff = sol.values - np.asarray(exact(RR, PP), dtype=np.complex128)
        l2s.append(_l2(diff, sol.rs, sol.phis))
        maxs.append(float(np.abs(diff).max()))
        shapes.append((g.n_r, g.n_a))
        scale = max(scale, float(np.abs(sol.values).max()))

    if max(l2s) <= 1e-13 * (1.0 + scale):
        return RateRecord(name, tuple(shapes), tuple(l2s), tuple(maxs),
                          None, None, note="not-applicable: errors at rounding level")

    idx = np.arange(len(grids), dtype=float)
    l2_order = float(-np.polyfit(idx, np.log2(l2s), 1)[0])
    max_order = float(-np.polyfit(idx, np.log2(maxs), 1)[0])
    return RateRecord(name, tuple(shapes), tuple(l2s), tuple(maxs),
                      l2_order, max_order)


# ---------------------------------------------------------------------------
# diagnostics on solutions


def ring_norms(sol: GridSolution) -> list[tuple[float, float]]:
    """Angular L2 norm of the solution per radial ring, innermost first."""
    dphi = float(sol.phis[1] - sol.phis[0])
    sq = ring_sq_norms(np.ascontiguousarray(sol.values), dphi)
    return [(float(r), float(math.sqrt(s))) for r, s in zip(sol.rs, sq)]


def fit_exponent(sol: GridSolution, window: tuple[float, float]
                 ) -> tuple[float, float]:
    """Vertex exponent beta with |u(r, .)| ~ r^beta from ring norms.

    Least-squares slope of log ring norm against log r over the rings in
    the window; returns (beta, coefficient of determination).
    """
    r_lo, r_hi = window
    R = float(sol.rs[-1])
    if r_hi > R / 4.0 + 1e-12:
        raise ValueError(f"window top {r_hi:g} exceeds R/4 = {R / 4:g}")
    if r_lo < sol.rs[0] - 1e-12:
        raise ValueError("window bottom lies below the innermost ring")
    mask = (sol.rs >= r_lo) & (sol.rs <= r_hi)
    if int(mask.sum()) < 4:
        raise ValueError("window too narrow: fewer than 4 rings")
    rs = sol.rs[mask]
    dphi = float(sol.phis[1] - sol.phis[0])
    sq = ring_sq_norms(np.ascontiguousarray(sol.values[mask]), dphi)
    if np.any(sq == 0.0):
        raise ValueError("ring norms vanish in the window; exponent undefined")
    y = 0.5 * np.log(sq)
    x = np.log(rs)
    beta, c0 = np.polyfit(x, y, 1)
    fitted = beta * x + c0
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 and ss_res == 0.0 else 1.0 - ss_res / max(ss_tot, 1e-300)
    return float(beta), float(r2)


@dataclass(frozen=True)
class ResolventScan:
    h: float
    p_values: tuple[float, ...]
    norms: tuple[float, ...]
    slope: float


def resolvent_scan(base: SectorProblem2D, h: float,
                   p_values: Sequence[float], grid: PolarGrid
                   ) -> ResolventScan:
    """L2 norm of the solution of -Delta u + e^{ih} p^2 u = f along p.

    The right-hand side is normalized to unit L2 norm once on the grid;
    a log-log slope near -2 certifies the parameter-elliptic resolvent
    decay ||u|| <= C p^{-2} ||f||.
    """
    if abs(h) >= math.pi / 2:
        raise ValueError("|h| must be < pi/2")
    ps = [float(p) for p in p_values]
    if len(ps) < 5:
        raise ValueError("need at least 5 p values")
    if any(q <= p for p, q in zip(ps, ps[1:])):
        raise ValueError("p values must be strictly increasing")

    rs = grid.radii(base.R)
    phis = grid.angles(base.d)
    RR, PP = np.meshgrid(rs, phis, indexing="ij")
    f0 = base.rhs if base.rhs is not None else (
        lambda r, phi: np.ones_like(np.asarray(r), dtype=complex))
    fvals = np.asarray(f0(RR, PP), dtype=np.complex128)
    fnorm = _l2(fvals, rs, phis)
    if fnorm == 0.0:
        raise ValueError("rhs vanishes; resolvent scan undefined")
    scaled = lambda r, phi: np.asarray(f0(r, phi), dtype=np.complex128) / fnorm

    norms = []
    for p in ps:
        prob = replace(base, c=complex(np.exp(1j * h) * p * p), rhs=scaled)
        sol = solve_sector(prob, grid)
        norms.append(_l2(sol.values, sol.rs, sol.phis))
    slope = float(np.polyfit(np.log(ps), np.log(norms), 1)[0])
    return ResolventScan(h=float(h), p_values=tuple(ps),
                         norms=tuple(norms), slope=slope)


# ---------------------------------------------------------------------------
# weighted norms


def _cartesian_gradient(U, rs, phis):
    t = np.log(rs)
    Ut = np.gradient(U, t, axis=0, edge_order=2)
    Up = np.gradient(U, phis, axis=1, edge_order=2)
    Ur = Ut / rs[:, None]
    cos, sin = np.cos(phis)[None, :], np.sin(phis)[None, :]
    Uphi_over_r = Up / rs[:, None]
    Ux = cos * Ur - sin * Uphi_over_r
    Uy = sin * Ur + cos * Uphi_over_r
    return Ux, Uy


def weighted_norm(sol: GridSolution, a: float, k: int, flavor: str) -> float:
    """Weighted Sobolev norm of grid values with vertex weight rho = r.

    H integrand: sum over |alpha| <= k of r^{2(a-k+|alpha|)} |D^alpha u|^2.
    E integrand replaces the weight by r^{2a}(r^{2(|alpha|-k)} + 1), so at
    k = 0 it is exactly twice the H integrand.  Derivatives come from the
    grid's finite differences; quadrature is midpoint in ln r, trapezoid
    in phi.
    """
    if k not in (0, 1, 2):
        raise ValueError("k must be 0, 1 or 2")
    if flavor not in ("H", "E"):
        raise ValueError("flavor must be 'H' or 'E'")
    U = sol.values
    rs, phis = sol.rs, sol.phis
    ders = [np.abs(U) ** 2]
    if k >= 1:
        Ux, Uy = _cartesian_gradient(U, rs, phis)
        ders.append(np.abs(Ux) ** 2 + np.abs(Uy) ** 2)
    if k == 2:
        Uxx, Uxy = _cartesian_gradient(Ux, rs, phis)
        Uyx, Uyy = _cartesian_gradient(Uy, rs, phis)
        mixed = 0.5 * (Uxy + Uyx)
        ders.append(np.abs(Uxx) ** 2 + np.abs(mixed) ** 2 + np.abs(Uyy) ** 2)

    wr, wp = _quad_weights(rs, phis)
    total = 0.0
    for j, dj in enumerate(ders):
        if flavor == "H":
            weight = rs ** (2.0 * (a - k + j))
        else:
            weight = rs ** (2.0 * a) * (rs ** (2.0 * (j - k)) + 1.0)
        total += float((wr * weight) @ dj @ wp)
    return math.sqrt(total)


def refine_grid(grid: PolarGrid) -> PolarGrid:
    """Halve both mesh spacings while keeping the radial span."""
    return PolarGrid(2 * grid.n_r, 2 * grid.n_a - 1, grid.rho_g, grid.r_span)
