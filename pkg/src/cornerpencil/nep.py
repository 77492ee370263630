"""Eigenvalue location for analytic matrix families T(lambda).

Counting uses the argument principle: the winding integral
(1/2 pi i) closed-integral trace(T^-1 T') dlambda over a rectangle equals
the algebraic eigenvalue count inside.  Extraction uses two contour
moments of T^-1 V with a seeded random probe V, followed by Newton
refinement on 1/trace(T^-1 T') with local-multiplicity acceleration.

Defective eigenvalues whose associated vectors vanish leave no trace in
the probe moments; a repair pass reconciles the extracted set against
the winding count by scanning for additional sigma_min dips.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve, svdvals

from .errors import (ContourTooClose, NoConvergence, NonIntegerWinding,
                     RankAmbiguous)
from .pencil import CompiledPencil, Discretization, PencilProblem, compile_pencil, discretize

_SIGMA_GUARD = 1e-6        # absolute sigma_min guard along contours
_WINDING_SLACK = 0.1       # max deviation of the raw integral from an integer
_CLUSTER_RADIUS = 1e-6     # eigenvalues closer than this merge


def _lu(T):
    # scipy warns on exactly singular pivots; iterates may land on a root
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        return lu_factor(T, check_finite=False)


@dataclass(frozen=True)
class NepOptions:
    quad_points: int = 128
    probe_rank: int = 8
    rank_tol: float = 1e-8
    residual_tol: float = 1e-8
    seed: int = 0
    refine_steps: int = 20

    def __post_init__(self):
        if min(self.quad_points, self.probe_rank, self.refine_steps) <= 0:
            raise ValueError("quad_points, probe_rank, refine_steps must be positive")
        if not (0 < self.rank_tol < 1):
            raise ValueError("rank_tol must lie in (0, 1)")
        if self.residual_tol <= 0:
            raise ValueError("residual_tol must be positive")


@dataclass(frozen=True)
class Rectangle:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError("rectangle must have positive width and height")

    def contains(self, lam: complex, pad: float = 0.0) -> bool:
        return (self.re_min - pad <= lam.real <= self.re_max + pad
                and self.im_min - pad <= lam.imag <= self.im_max + pad)

    @property
    def corners(self) -> tuple[complex, complex, complex, complex]:
        return (complex(self.re_min, self.im_min),
                complex(self.re_max, self.im_min),
                complex(self.re_max, self.im_max),
                complex(self.re_min, self.im_max))


@dataclass(frozen=True)
class EigenEstimate:
    lam: complex
    sigma_min: float
    resolution_stable: bool


@dataclass(frozen=True)
class LineVerdict:
    status: str                    # "free" | "eigenvalue_found" | "inconclusive"
    eigenvalue: complex | None = None


def _as_compiled(p: PencilProblem, d: Discretization) -> CompiledPencil:
    return p if isinstance(p, CompiledPencil) else compile_pencil(p, d)


def _sigma_min_estimate(lu_piv, v0: np.ndarray) -> float:
    """Inverse-iteration estimate of sigma_min from an LU factorization."""
    x = v0
    sigma = np.inf
    for _ in range(3):
        y = lu_solve(lu_piv, x, trans=2)
        z = lu_solve(lu_piv, y, trans=0)
        nz = np.linalg.norm(z)
        if not np.isfinite(nz) or nz == 0.0:
            return 0.0
        sigma = math.sqrt(np.linalg.norm(x) / nz)
        x = z / nz
    return sigma


def _edge_counts(rect: Rectangle, opts: NepOptions,
                 spacing: float | None) -> list[int]:
    counts = []
    for i, a in enumerate(rect.corners):
        b = rect.corners[(i + 1) % 4]
        q = opts.quad_points
        if spacing is not None:
            q = max(q, int(math.ceil(abs(b - a) / spacing)))
        counts.append(q)
    return counts


def _contour_sweep(cp: CompiledPencil, rect: Rectangle, opts: NepOptions,
                   probe: np.ndarray | None = None,
                   spacing: float | None = None):
    """Trapezoid sweep over the rectangle boundary.

    Returns (raw winding value, raw first trace moment, A0, A1); raises
    ContourTooClose when the sigma_min estimate drops below the absolute
    guard at any node.
    """
    n = cp.size
    rng = np.random.default_rng(opts.seed + 1)
    v0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    counts = _edge_counts(rect, opts, spacing)

    total = 0.0 + 0.0j
    total1 = 0.0 + 0.0j
    A0 = A1 = None
    if probe is not None:
        A0 = np.zeros((n, probe.shape[1]), dtype=complex)
        A1 = np.zeros_like(A0)

    corners = rect.corners
    for e in range(4):
        a, b = corners[e], corners[(e + 1) % 4]
        q = counts[e]
        ts = np.linspace(0.0, 1.0, q + 1)
        h = (b - a) / q
        for i, t in enumerate(ts):
            lam = a + (b - a) * t
            T = cp.matrix(lam)
            lu = _lu(T)
            sigma = _sigma_min_estimate(lu, v0)
            if sigma < _SIGMA_GUARD:
                raise ContourTooClose(lam, sigma)
            w = h if 0 < i < q else 0.5 * h
            term = np.trace(lu_solve(lu, cp.derivative(lam, 1)))
            total += w * term
            total1 += (w * lam) * term
            if probe is not None:
                Y = lu_solve(lu, probe)
                A0 += w * Y
                A1 += (w * lam) * Y
    norm = 2j * np.pi
    if probe is not None:
        return total / norm, total1 / norm, A0 / norm, A1 / norm
    return total / norm, total1 / norm, None, None


def _count_raw(cp: CompiledPencil, rect: Rectangle, opts: NepOptions,
               spacing: float | None = None) -> int:
    raw, _, _, _ = _contour_sweep(cp, rect, opts, spacing=spacing)
    nearest = round(raw.real)
    if abs(raw - nearest) > _WINDING_SLACK:
        raise NonIntegerWinding(raw)
    return int(nearest)


def _cluster_info(cp: CompiledPencil, center: complex, radius: float,
                  opts: NepOptions, n_nodes: int = 64) -> tuple[int, complex]:
    """Count and centroid of eigenvalues in a small disk around center.

    The centroid (first trace moment over the count) relocates a root
    cluster far more accurately than pointwise iteration can: the
    contour stays away from the singularity, so no rounding basin is
    entered even for defective eigenvalues.  On a circle the periodic
    trapezoid rule converges geometrically, so 64 nodes reach rounding
    accuracy whenever exterior eigenvalues keep twice the radius away.
    """
    rng = np.random.default_rng(opts.seed + 1)
    v0 = rng.standard_normal(cp.size) + 1j * rng.standard_normal(cp.size)
    thetas = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
    raw = 0.0 + 0.0j
    raw1 = 0.0 + 0.0j
    for th in thetas:
        zeta = radius * np.exp(1j * th)
        lam = center + zeta
        lu = _lu(cp.matrix(lam))
        sigma = _sigma_min_estimate(lu, v0)
        if sigma < _SIGMA_GUARD:
            raise ContourTooClose(lam, sigma)
        term = np.trace(lu_solve(lu, cp.derivative(lam, 1))) * zeta
        raw += term
        raw1 += term * lam
    raw /= n_nodes
    raw1 /= n_nodes
    cnt = round(raw.real)
    if abs(raw - cnt) > _WINDING_SLACK:
        raise NonIntegerWinding(raw)
    if cnt == 0:
        return 0, complex(center)
    return int(cnt), raw1 / cnt


def count_in_rectangle(p: PencilProblem, d: Discretization, rect: Rectangle,
                       opts: NepOptions | None = None) -> int:
    """Algebraic eigenvalue count of T inside the rectangle."""
    opts = opts or NepOptions()
    return _count_raw(_as_compiled(p, d), rect, opts)


# ---------------------------------------------------------------------------
# refinement


def _sigma_min(T: np.ndarray) -> float:
    return float(svdvals(T)[-1])


def _refine_raw(cp: CompiledPencil, lam0: complex, opts: NepOptions):
    """Newton on 1/trace(T^-1 T') with Schroeder multiplicity acceleration.

    Returns (lambda, sigma_min).  The consecutive-step ratio estimates the
    local multiplicity m; amplifying the step by m restores quadratic
    convergence at multiple roots.  A small residual alone does not pin
    lambda (sigma_min ~ |delta|^m near a multiple eigenvalue), so the
    iteration also requires the Newton step itself to collapse.
    """
    lam = complex(lam0)
    trust = 0.5 * (1.0 + abs(lam0))
    g_prev = None
    best = (lam, _sigma_min(cp.matrix(lam)))

    for _ in range(opts.refine_steps):
        try:
            lu = _lu(cp.matrix(lam))
            tr = np.trace(lu_solve(lu, cp.derivative(lam, 1)))
        except Exception:
            break
        if tr == 0 or not np.isfinite(tr):
            break   # exactly singular: current iterate is the root
        g = 1.0 / tr
        mhat = 1
        if g_prev is not None and abs(g_prev) > 0:
            ratio = g / g_prev
            if abs(ratio) < 0.95:
                m_est = 1.0 / (1.0 - ratio)
                m_round = int(round(m_est.real))
                if 1 <= m_round <= 8 and abs(m_est - m_round) < 0.3:
                    mhat = m_round
        nxt = lam - mhat * g
        if abs(nxt - lam0) > trust:
            raise NoConvergence(
                f"iterate left the trust region around {lam0} (reached {nxt})"
            )
        sigma = _sigma_min(cp.matrix(nxt))
        if sigma < best[1]:
            best = (nxt, sigma)
        step = abs(nxt - lam)
        g_prev = g
        lam = nxt
        if sigma <= opts.residual_tol:
            # sigma_min goes flat at the rounding floor near a multiple
            # root, so finish by driving the Newton step itself down
            lam, sigma = _terminal_polish(cp, lam, g_prev, step)
            if sigma <= opts.residual_tol:
                return lam, sigma
            return best
    if best[1] <= opts.residual_tol:
        return best
    raise NoConvergence(
        f"no eigenvalue within tolerance after {opts.refine_steps} steps "
        f"from {lam0} (best sigma_min {best[1]:.3e} at {best[0]})"
    )


def _terminal_polish(cp: CompiledPencil, lam: complex, g_prev, last_step: float):
    """Ride trustworthy Newton increments down, then extrapolate the root.

    Approaching a root of multiplicity m, the computed g = 1/trace is
    accurate while |g| keeps shrinking and turns to pure rounding noise
    inside a basin where neither sigma_min nor the trace carries signal.
    The returned estimate is the secant-multiplicity landing
    lam - m*g from the last iterate measured before the noise floor,
    which never evaluates anything inside the basin.
    """
    pts: list[tuple[complex, complex]] = []
    cur = complex(lam)
    for _ in range(6):
        try:
            lu = _lu(cp.matrix(cur))
            tr = np.trace(lu_solve(lu, cp.derivative(cur, 1)))
        except Exception:
            break
        if tr == 0 or not np.isfinite(tr):
            break
        g = 1.0 / tr
        if pts and abs(g) >= abs(pts[-1][1]):
            break   # increments stopped shrinking: noise floor
        pts.append((cur, g))
        mhat = 1
        ref = pts[-2][1] if len(pts) >= 2 else g_prev
        if ref is not None and abs(ref) > 0:
            ratio = g / ref
            if abs(ratio) < 0.95:
                m_round = int(round((1.0 / (1.0 - ratio)).real))
                if 1 <= m_round <= 8 and abs(1.0 / (1.0 - ratio) - m_round) < 0.3:
                    mhat = m_round
        cur = cur - mhat * g

    if not pts:
        return lam, _sigma_min(cp.matrix(lam))
    l2, g2 = pts[-1]
    cand = l2 - g2
    if len(pts) >= 2:
        l1, g1 = pts[-2]
        if g1 != g2:
            m = (l2 - l1) / (g2 - g1)
            if abs(m - round(m.real)) < 0.2 and 1 <= round(m.real) <= 8:
                m = round(m.real)
            cand = l2 - m * g2
    sig_cand = _sigma_min(cp.matrix(cand))
    sig_l2 = _sigma_min(cp.matrix(l2))
    if sig_cand <= max(10.0 * sig_l2, 1e-13):
        return cand, sig_cand
    return (l2, sig_l2) if sig_l2 < sig_cand else (cand, sig_cand)


def refine(p: PencilProblem, d: Discretization, lam0: complex,
           opts: NepOptions | None = None) -> EigenEstimate:
    """Polish an eigenvalue candidate; raises NoConvergence outside a basin."""
    opts = opts or NepOptions()
    cp = _as_compiled(p, d)
    lam, sigma = _refine_raw(cp, lam0, opts)
    stable = _is_resolution_stable(p, d, lam, opts)
    return EigenEstimate(lam=lam, sigma_min=sigma, resolution_stable=stable)


def _isolation_half(lam: complex, others) -> float:
    gap = min((abs(lam - o) for o in others if o is not lam), default=np.inf)
    half = min(0.02, gap / 3.0) if np.isfinite(gap) else 0.02
    return max(half, 1e-4)


def _is_resolution_stable(p: PencilProblem, d: Discretization, lam: complex,
                          opts: NepOptions, others=()) -> bool:
    """Does the local eigenvalue cluster persist when n_phi doubles?

    Checks that an isolating disk still holds spectrum on the doubled
    grid and that its centroid moved by at most 10 * residual_tol.
    """
    if isinstance(p, CompiledPencil):      # internal reuse
        p = p.problem
    d2 = discretize(p, 2 * d.n_phi)
    cp2 = compile_pencil(p, d2)
    half = _isolation_half(lam, others)
    for _ in range(2):
        try:
            cnt, centroid = _cluster_info(cp2, lam, half, opts)
        except (ContourTooClose, NonIntegerWinding):
            half *= 0.5
            continue
        return cnt > 0 and abs(centroid - lam) <= 10.0 * opts.residual_tol
    return False


# ---------------------------------------------------------------------------
# extraction


def _probe_matrix(n: int, k: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    rad = np.sqrt(rng.uniform(size=(n, k)))
    ang = rng.uniform(size=(n, k)) * 2.0 * np.pi
    return rad * np.exp(1j * ang)


def _rank_cut(svals: np.ndarray, rank_tol: float) -> int:
    """Gap-based numerical rank with the factor-10 ambiguity rule."""
    s0 = svals[0]
    if s0 == 0:
        return 0
    rel = svals / s0
    alive = int(np.sum(rel > rank_tol))
    if alive == 0:
        return 0
    if alive < len(rel):
        # everything below the floor is noise; gap location is free
        ratios = rel[:alive] / np.maximum(rel[1:alive + 1], 1e-300)
    else:
        ratios = rel[:-1] / np.maximum(rel[1:], 1e-300)
    if ratios.size == 0:
        return alive
    cut = int(np.argmax(ratios))
    if ratios[cut] < 10.0:
        raise RankAmbiguous(
            f"largest singular-value gap is only a factor {ratios[cut]:.2f} "
            f"(rank_tol {rank_tol:g}); raise quad_points or probe_rank"
        )
    return cut + 1


def _dedupe(lams: list[complex]) -> list[complex]:
    out: list[complex] = []
    for z in lams:
        if all(abs(z - w) > _CLUSTER_RADIUS * (1.0 + abs(z)) for w in out):
            out.append(z)
    return out


def _local_multiplicity(cp: CompiledPencil, lam: complex, others,
                        opts: NepOptions) -> int:
    cnt, _ = _cluster_info(cp, lam, _isolation_half(lam, others), opts)
    return cnt


def _sigma_scan_candidates(cp: CompiledPencil, rect: Rectangle,
                           opts: NepOptions, known: list[complex],
                           grid: int = 33) -> list[complex]:
    """Coarse sigma_min surface scan; returns refinable dip locations."""
    rng = np.random.default_rng(opts.seed + 2)
    v0 = rng.standard_normal(cp.size) + 1j * rng.standard_normal(cp.size)
    xs = np.linspace(rect.re_min, rect.re_max, grid)
    ys = np.linspace(rect.im_min, rect.im_max, grid)
    surf = np.empty((grid, grid))
    for i, y in enumerate(ys):
        for j, x in enumerate(xs):
            lam = complex(x, y)
            try:
                surf[i, j] = _sigma_min_estimate(_lu(cp.matrix(lam)), v0)
            except Exception:
                surf[i, j] = 0.0
    cands = []
    # generous ceiling: a dip halfway between grid nodes only reaches a
    # third of the ambient level, and refinement rejects false positives
    ceiling = np.median(surf) * 0.3
    for i in range(grid):
        for j in range(grid):
            v = surf[i, j]
            if v > ceiling:
                continue
            patch = surf[max(0, i - 1):i + 2, max(0, j - 1):j + 2]
            if v <= patch.min():
                lam = complex(xs[j], ys[i])
                if all(abs(lam - k) > 10 * _CLUSTER_RADIUS for k in known):
                    cands.append(lam)
    cands.sort(key=lambda z: (z.imag, z.real))
    return cands


def _beyn_raw(cp: CompiledPencil, d: Discretization, rect: Rectangle,
              opts: NepOptions, spacing: float | None = None
              ) -> list[EigenEstimate]:
    target = _count_raw(cp, rect, opts, spacing=spacing)
    if target == 0:
        return []
    if target > opts.probe_rank - 2:
        raise ValueError(
            f"count {target} exceeds probe_rank - 2 = {opts.probe_rank - 2}; "
            "enlarge probe_rank"
        )
    probe = _probe_matrix(cp.size, opts.probe_rank, opts.seed)
    _, _, A0, A1 = _contour_sweep(cp, rect, opts, probe=probe, spacing=spacing)
    U, s, Wh = np.linalg.svd(A0, full_matrices=False)
    ambiguity: RankAmbiguous | None = None
    try:
        rank = _rank_cut(s, opts.rank_tol)
    except RankAmbiguous as err:
        # an eigenvalue whose moments vanish (zero associated vectors)
        # leaves A0 all noise; fall through to the sigma-scan repair and
        # only surface the ambiguity if that cannot reconcile the count
        ambiguity = err
        rank = 0
    found: list[complex] = []
    if rank > 0:
        B = (U[:, :rank].conj().T @ A1 @ Wh[:rank].conj().T) / s[:rank][None, :]
        for z in sorted(np.linalg.eigvals(B), key=lambda w: (w.imag, w.real)):
            if not rect.contains(z, pad=0.1 * (1 + abs(z))):
                continue
            try:
                lam, sigma = _refine_raw(cp, z, opts)
            except NoConvergence:
                continue
            if rect.contains(lam) and sigma <= opts.residual_tol:
                found.append(lam)
    found = _dedupe(found)

    # reconcile against the winding count: moment extraction cannot see a
    # Jordan block whose associated vectors vanish, so hunt for the rest
    for _ in range(4):
        assigned = sum(_local_multiplicity(cp, z, found, opts) for z in found)
        if assigned >= target:
            break
        added = False
        for cand in _sigma_scan_candidates(cp, rect, opts, found):
            try:
                lam, sigma = _refine_raw(cp, cand, opts)
            except NoConvergence:
                continue
            if (rect.contains(lam) and sigma <= opts.residual_tol
                    and all(abs(lam - z) > _CLUSTER_RADIUS * (1 + abs(lam))
                            for z in found)):
                found.append(lam)
                added = True
        if not added:
            break
    assigned = sum(_local_multiplicity(cp, z, found, opts) for z in found)
    if assigned != target:
        if ambiguity is not None:
            raise ambiguity
        raise NoConvergence(
            f"extracted multiplicities total {assigned} but the winding "
            f"count is {target}; increase quad_points or probe_rank"
        )

    out = []
    for lam in sorted(found, key=lambda z: (z.imag, z.real)):
        sigma = _sigma_min(cp.matrix(lam))
        stable = _is_resolution_stable(cp, d, lam, opts, others=found)
        out.append(EigenEstimate(lam=lam, sigma_min=sigma,
                                 resolution_stable=stable))
    return out


def beyn_eigs(p: PencilProblem, d: Discretization, rect: Rectangle,
              opts: NepOptions | None = None) -> list[EigenEstimate]:
    """Contour-moment eigenvalue extraction inside a rectangle.

    Every returned estimate is Newton-refined to sigma_min <= residual_tol
    and checked for stability under doubling of the discretization.
    """
    opts = opts or NepOptions()
    return _beyn_raw(_as_compiled(p, d), d, rect, opts)


# ---------------------------------------------------------------------------
# line checks


_LINE_EPS = 1e-3           # thin-rectangle half-height around the line


def line_free(p: PencilProblem, d: Discretization, beta: float,
              re_halfwidth: float, opts: NepOptions | None = None
              ) -> LineVerdict:
    """Check the segment Im lambda = beta, |Re lambda| <= re_halfwidth.

    Combines direct sigma_min sampling (with refinement started from the
    dips) and a thin-rectangle winding count.  ``free`` requires both
    indicators clean; disagreement yields ``inconclusive``.
    """
    if re_halfwidth <= 0:
        raise ValueError("re_halfwidth must be positive")
    opts = opts or NepOptions()
    cp = _as_compiled(p, d)

    xs = np.linspace(-re_halfwidth, re_halfwidth, 129)
    sigmas = np.array([_sigma_min(cp.matrix(complex(x, beta))) for x in xs])

    # local dips first: an eigenvalue on (or within eps of) the line shows
    # up as a sharp minimum that Newton can lock onto
    order = np.argsort(sigmas)
    tried = 0
    for idx in order:
        if tried >= 5 or sigmas[idx] > 1e-2 * max(1.0, float(np.max(sigmas))):
            break
        left = sigmas[idx - 1] if idx > 0 else np.inf
        right = sigmas[idx + 1] if idx + 1 < len(xs) else np.inf
        if sigmas[idx] > min(left, right):
            continue
        tried += 1
        try:
            lam, sigma = _refine_raw(cp, complex(xs[idx], beta), opts)
        except NoConvergence:
            continue
        if (sigma <= opts.residual_tol and abs(lam.imag - beta) <= _LINE_EPS
                and abs(lam.real) <= re_halfwidth):
            return LineVerdict(status="eigenvalue_found", eigenvalue=lam)

    thin = Rectangle(-re_halfwidth, re_halfwidth,
                     beta - _LINE_EPS, beta + _LINE_EPS)
    try:
        cnt = _count_raw(cp, thin, opts, spacing=2 * re_halfwidth / 512)
    except ContourTooClose as err:
        try:
            lam, sigma = _refine_raw(cp, err.where, opts)
        except NoConvergence:
            return LineVerdict(status="inconclusive")
        if (sigma <= opts.residual_tol and abs(lam.imag - beta) <= _LINE_EPS
                and abs(lam.real) <= re_halfwidth):
            return LineVerdict(status="eigenvalue_found", eigenvalue=lam)
        return LineVerdict(status="inconclusive")
    except NonIntegerWinding:
        return LineVerdict(status="inconclusive")

    sigma_clean = bool(np.min(sigmas) > 10.0 * opts.residual_tol)
    if cnt == 0 and sigma_clean:
        return LineVerdict(status="free")
    return LineVerdict(status="inconclusive")
