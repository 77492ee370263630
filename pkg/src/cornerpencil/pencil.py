"""Angular operator pencils on unions of plane angles.

A problem couples second order (or order 2m) ordinary differential
operators in the angle variable phi, one per component interval, through
boundary rows that may evaluate other components at shifted, scaled
interior angles.  Separating r^{i lambda} turns the radial part into the
spectral parameter lambda, and the whole boundary-value problem into an
analytic matrix family T(lambda) after Chebyshev collocation.

Coefficients may be complex constants, :class:`TrigPoly` instances, or
arbitrary callables of phi.  Only the first two survive serialization.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import NonEllipticSymbol

_FULL_CIRCLE_TOL = 1e-12


# ---------------------------------------------------------------------------
# coefficient functions


@dataclass(frozen=True)
class TrigPoly:
    """Trigonometric polynomial c0 + sum_k (a_k cos k phi + b_k sin k phi)."""

    const: complex = 0.0
    cos: tuple[tuple[int, complex], ...] = ()
    sin: tuple[tuple[int, complex], ...] = ()

    def __call__(self, phi):
        out = np.full_like(np.asarray(phi, dtype=float), self.const, dtype=complex)
        for k, a in self.cos:
            out = out + a * np.cos(k * np.asarray(phi, dtype=float))
        for k, b in self.sin:
            out = out + b * np.sin(k * np.asarray(phi, dtype=float))
        return out

    def conjugate(self) -> "TrigPoly":
        return TrigPoly(
            const=np.conj(self.const),
            cos=tuple((k, np.conj(a)) for k, a in self.cos),
            sin=tuple((k, np.conj(b)) for k, b in self.sin),
        )

    @staticmethod
    def make(const=0.0, cos: Mapping[int, complex] | None = None,
             sin: Mapping[int, complex] | None = None) -> "TrigPoly":
        cs = tuple(sorted((int(k), complex(v)) for k, v in (cos or {}).items()))
        sn = tuple(sorted((int(k), complex(v)) for k, v in (sin or {}).items()))
        return TrigPoly(complex(const), cs, sn)


def coeff_values(coeff, phi: np.ndarray) -> np.ndarray:
    """Evaluate a coefficient (constant, TrigPoly or callable) at angles."""
    phi = np.asarray(phi, dtype=float)
    if isinstance(coeff, TrigPoly):
        return np.asarray(coeff(phi), dtype=complex)
    if callable(coeff):
        try:
            vals = coeff(phi)
        except (TypeError, ValueError):
            vals = np.array([coeff(x) for x in phi.ravel()]).reshape(phi.shape)
        return np.asarray(vals, dtype=complex)
    return np.full(phi.shape, complex(coeff), dtype=complex)


# ---------------------------------------------------------------------------
# problem types


@dataclass(frozen=True)
class PencilOperator:
    """Differential-in-phi, polynomial-in-lambda operator.

    ``terms`` maps ``(dphi_power, lambda_power)`` to a coefficient; the
    operator is ``sum coeff(phi) * lambda**a2 * d^a1/dphi^a1``.
    """

    order: int
    terms: Mapping[tuple[int, int], object]

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: kv[0])

    def max_lambda_power(self) -> int:
        return max((a2 for (_, a2) in self.terms), default=0)


@dataclass(frozen=True)
class BCTerm:
    """One summand of a boundary row.

    ``source`` names the component whose trace is taken, ``shift`` the
    angular offset from the row's boundary angle, ``chi`` the radial
    scaling (contributing the factor chi**(i lambda - m_row)), and ``op``
    the boundary operator applied before evaluation.
    """

    source: int
    shift: float
    chi: float
    op: PencilOperator


@dataclass(frozen=True)
class BoundaryRow:
    component: int
    side: str                      # "lower" | "upper"
    row_order: int                 # m_row, the boundary operator order
    terms: tuple[BCTerm, ...]
    kind: str = "standard"         # "standard" | "periodic_match"
    match_order: int | None = None  # derivative order j0 for periodic rows


@dataclass(frozen=True)
class Component:
    interval: tuple[float, float]
    operator: PencilOperator


@dataclass(frozen=True)
class PencilProblem:
    """Full pencil description: components plus boundary rows.

    ``symbol`` optionally records the Cartesian second-order symbol the
    problem was derived from; the adjoint construction requires it.
    """

    m: int
    components: tuple[Component, ...]
    rows: tuple[BoundaryRow, ...]
    symbol: tuple[complex, complex, complex] | None = None


# ---------------------------------------------------------------------------
# validation


def validate_problem(p: PencilProblem) -> list[str]:
    """Return a list of diagnostics; empty iff all invariants hold."""
    diags: list[str] = []
    if p.m < 1:
        diags.append(f"m must be >= 1, got {p.m}")
        return diags
    order = 2 * p.m
    n_comp = len(p.components)

    for j, comp in enumerate(p.components):
        d1, d2 = comp.interval
        if not d1 < d2:
            diags.append(f"component {j}: interval endpoints not increasing")
        if comp.operator.order != order:
            diags.append(f"component {j}: operator order {comp.operator.order} != 2m")
        for (a1, a2) in comp.operator.terms:
            if a1 < 0 or a2 < 0 or a1 + a2 > comp.operator.order:
                diags.append(f"component {j}: term ({a1},{a2}) violates a1+a2 <= order")
        principal = comp.operator.terms.get((order, 0))
        if principal is None:
            diags.append(f"component {j}: missing principal angular term ({order},0)")
        else:
            sample = np.linspace(d1, d2, 129)
            vals = coeff_values(principal, sample)
            if np.min(np.abs(vals)) < 1e-12:
                diags.append(f"component {j}: principal angular coefficient vanishes")

    if len(p.rows) != order * n_comp:
        diags.append(
            f"row count mismatch: expected {order * n_comp}, got {len(p.rows)}"
        )

    kinds = {row.kind for row in p.rows}
    if "periodic_match" in kinds:
        if kinds != {"periodic_match"}:
            diags.append("periodic_match rows cannot be mixed with standard rows")
        if n_comp != 1:
            diags.append("periodic_match rows require a single component")
        else:
            d1, d2 = p.components[0].interval
            if abs((d2 - d1) - 2 * math.pi) > _FULL_CIRCLE_TOL:
                diags.append("periodic_match rows require a full-circle interval")
        orders = sorted(row.match_order for row in p.rows
                        if row.match_order is not None)
        if orders != list(range(order)):
            diags.append(
                f"periodic_match orders must be 0..{order - 1}, got {orders}"
            )

    side_count: dict[tuple[int, str], int] = {}
    for i, row in enumerate(p.rows):
        if not (0 <= row.component < n_comp):
            diags.append(f"row {i}: component index {row.component} out of range")
            continue
        if row.side not in ("lower", "upper"):
            diags.append(f"row {i}: unknown side {row.side!r}")
            continue
        if not (0 <= row.row_order < order):
            diags.append(f"row {i}: row_order {row.row_order} not in [0, 2m)")
        if not row.terms:
            diags.append(f"row {i}: empty term list")
        if row.kind == "standard":
            side_count[(row.component, row.side)] = (
                side_count.get((row.component, row.side), 0) + 1
            )
        d1, d2 = p.components[row.component].interval
        anchor = d1 if row.side == "lower" else d2
        for t, term in enumerate(row.terms):
            if not (0 <= term.source < n_comp):
                diags.append(f"row {i} term {t}: source {term.source} out of range")
                continue
            if term.chi <= 0:
                diags.append(f"row {i} term {t}: chi must be > 0")
            if term.op.order != row.row_order:
                diags.append(
                    f"row {i} term {t}: operator order {term.op.order} "
                    f"!= row_order {row.row_order}"
                )
            local = term.source == row.component and term.shift == 0.0
            if local:
                if term.chi != 1.0:
                    diags.append(f"row {i} term {t}: local term must have chi = 1")
                continue
            if row.kind == "periodic_match":
                continue
            s1, s2 = p.components[term.source].interval
            angle = anchor + term.shift
            if not (s1 < angle < s2):
                diags.append(
                    f"row {i} term {t}: shift angle not strictly interior "
                    f"(angle {angle:.6g} vs interval ({s1:.6g}, {s2:.6g}))"
                )

    if "periodic_match" not in kinds:
        for j in range(n_comp):
            for side in ("lower", "upper"):
                got = side_count.get((j, side), 0)
                if got != p.m:
                    diags.append(
                        f"component {j} side {side}: expected {p.m} rows, got {got}"
                    )
    return diags


# ---------------------------------------------------------------------------
# built-in problems


def _laplace_operator() -> PencilOperator:
    return PencilOperator(order=2, terms={(2, 0): -1.0 + 0j, (0, 2): 1.0 + 0j})


def _eval_row(component: int, side: str, terms) -> BoundaryRow:
    bct = tuple(
        BCTerm(source=s, shift=sh, chi=1.0,
               op=PencilOperator(order=0, terms={(0, 0): complex(c)}))
        for (s, sh, c) in terms
    )
    return BoundaryRow(component=component, side=side, row_order=0, terms=bct)


def _periodic_rows(order: int) -> tuple[BoundaryRow, ...]:
    rows = []
    for j0 in range(order):
        op = PencilOperator(order=j0, terms={(j0, 0): 1.0 + 0j})
        rows.append(BoundaryRow(
            component=0, side="lower" if j0 < order // 2 else "upper",
            row_order=j0, terms=(BCTerm(0, 0.0, 1.0, op),),
            kind="periodic_match", match_order=j0,
        ))
    return tuple(rows)


def builtin_problem(name: str, params: Mapping[str, float] | None = None) -> PencilProblem:
    """Construct one of the worked problems by name.

    Names: ``dirichlet_laplace`` (param d), ``periodic_laplace``,
    ``ex21_sector`` (d, alpha1, alpha2), ``ex6_quarter`` (alpha1, alpha2),
    ``ex11_orbit4`` (alpha1, alpha2, beta1, beta2).
    """
    params = dict(params or {})

    def need(key):
        if key not in params:
            raise ValueError(f"builtin {name!r} requires parameter {key!r}")
        return float(params[key])

    if name == "dirichlet_laplace":
        d = need("d")
        if d <= 0:
            raise ValueError("opening d must be > 0")
        comp = Component((0.0, d), _laplace_operator())
        rows = (
            _eval_row(0, "lower", [(0, 0.0, 1.0)]),
            _eval_row(0, "upper", [(0, 0.0, 1.0)]),
        )
        return PencilProblem(m=1, components=(comp,), rows=rows)

    if name == "periodic_laplace":
        comp = Component((0.0, 2 * math.pi), _laplace_operator())
        return PencilProblem(m=1, components=(comp,), rows=_periodic_rows(2),
                             symbol=(-1.0 + 0j, 0j, -1.0 + 0j))

    if name == "ex21_sector":
        d = need("d")
        a1, a2 = need("alpha1"), need("alpha2")
        if d <= 0:
            raise ValueError("opening d must be > 0")
        comp = Component((0.0, d), _laplace_operator())
        rows = (
            _eval_row(0, "lower", [(0, 0.0, 1.0), (0, d / 2, -a1)]),
            _eval_row(0, "upper", [(0, 0.0, 1.0), (0, -d / 2, -a2)]),
        )
        return PencilProblem(m=1, components=(comp,), rows=rows)

    if name == "ex6_quarter":
        a1, a2 = need("alpha1"), need("alpha2")
        comp = Component((-math.pi / 4, math.pi / 4), _laplace_operator())
        rows = (
            _eval_row(0, "lower", [(0, 0.0, 1.0), (0, math.pi / 4, -a1)]),
            _eval_row(0, "upper", [(0, 0.0, 1.0), (0, -math.pi / 4, -a2)]),
        )
        return PencilProblem(m=1, components=(comp,), rows=rows)

    if name == "ex11_orbit4":
        a1, a2 = need("alpha1"), need("alpha2")
        b1, b2 = need("beta1"), need("beta2")
        iv12 = (math.pi / 4, 5 * math.pi / 4)
        iv34 = (3 * math.pi / 4, 7 * math.pi / 4)
        comps = tuple(Component(iv, _laplace_operator())
                      for iv in (iv12, iv12, iv34, iv34))
        # Dirichlet traces on the Gamma_{j1} rays, coupled traces on the
        # shared rays: components 1,2 end where 3,4 begin and vice versa.
        rows = (
            _eval_row(0, "lower", [(0, 0.0, 1.0)]),
            _eval_row(1, "lower", [(1, 0.0, 1.0)]),
            _eval_row(2, "upper", [(2, 0.0, 1.0)]),
            _eval_row(3, "upper", [(3, 0.0, 1.0)]),
            _eval_row(0, "upper", [(0, 0.0, 1.0), (2, 0.0, a1), (3, 0.0, b1)]),
            _eval_row(1, "upper", [(1, 0.0, 1.0), (2, 0.0, b1), (3, 0.0, a1)]),
            _eval_row(2, "lower", [(2, 0.0, 1.0), (0, 0.0, a2), (1, 0.0, b2)]),
            _eval_row(3, "lower", [(3, 0.0, 1.0), (0, 0.0, b2), (1, 0.0, a2)]),
        )
        return PencilProblem(m=1, components=comps, rows=rows)

    raise ValueError(f"unknown builtin problem {name!r}")


# ---------------------------------------------------------------------------
# polar form of a constant-coefficient second-order symbol


def polar_pencil_from_symbol(a20: complex, a11: complex, a02: complex) -> PencilOperator:
    """Angular pencil of ``a20 d_y1^2 + a11 d_y1 d_y2 + a02 d_y2^2``.

    The returned operator satisfies
    ``A(D_y)(r^{i lam} F(phi)) = r^{i lam - 2} (pencil F)(phi)`` exactly;
    its coefficients are trigonometric polynomials in 2 phi.

    Raises :class:`NonEllipticSymbol` when the symbol has a real
    characteristic direction.
    """
    a20, a11, a02 = complex(a20), complex(a11), complex(a02)
    scale = max(abs(a20), abs(a11), abs(a02))
    if scale == 0:
        raise NonEllipticSymbol("zero symbol")
    if abs(a20) < 1e-14 * scale:
        # xi = (1, 0) annihilates the symbol
        raise NonEllipticSymbol("symbol vanishes on the direction xi = (1, 0)")
    roots = np.roots([a20, a11, a02])
    for t in roots:
        if abs(t.imag) < 1e-12 * (1.0 + abs(t)):
            raise NonEllipticSymbol(
                f"symbol vanishes on the real direction xi = (1, {t.real:.6g})"
            )

    half_sum = (a20 + a02) / 2
    half_diff = (a20 - a02) / 2
    # second angular derivative
    c_dphi2 = TrigPoly.make(const=half_sum,
                            cos={2: -half_diff}, sin={2: -a11 / 2})
    # first angular derivative: c1(phi) = a11 cos 2phi - (a20 - a02) sin 2phi
    c1_cos, c1_sin = a11, -(a20 - a02)
    c_dphi1 = TrigPoly.make(cos={2: -c1_cos}, sin={2: -c1_sin})
    c_dphi1_lam = TrigPoly.make(cos={2: 1j * c1_cos}, sin={2: 1j * c1_sin})
    # zero-order lambda coefficients
    c_lam2 = TrigPoly.make(const=-half_sum, cos={2: -half_diff}, sin={2: -a11 / 2})
    c_lam1 = TrigPoly.make(cos={2: -1j * (a20 - a02)}, sin={2: -1j * a11})

    terms = {
        (2, 0): c_dphi2,
        (1, 0): c_dphi1,
        (1, 1): c_dphi1_lam,
        (0, 2): c_lam2,
        (0, 1): c_lam1,
    }
    # drop identically-zero entries to keep assembled stacks small
    terms = {
        key: c for key, c in terms.items()
        if not (isinstance(c, TrigPoly) and c.const == 0 and
                all(v == 0 for _, v in c.cos) and all(v == 0 for _, v in c.sin))
    }
    return PencilOperator(order=2, terms=terms)


def full_circle_from_symbol(a20: complex, a11: complex, a02: complex) -> PencilProblem:
    """Single-component full-circle problem with periodic matching rows."""
    op = polar_pencil_from_symbol(a20, a11, a02)
    comp = Component((0.0, 2 * math.pi), op)
    return PencilProblem(m=1, components=(comp,), rows=_periodic_rows(2),
                         symbol=(complex(a20), complex(a11), complex(a02)))


# ---------------------------------------------------------------------------
# discretization


def _cheb_nodes(n: int, d1: float, d2: float) -> np.ndarray:
    k = np.arange(n)
    ref = -np.cos(np.pi * k / (n - 1))           # ascending on [-1, 1]
    return 0.5 * (d1 + d2) + 0.5 * (d2 - d1) * ref


def _bary_weights(n: int) -> np.ndarray:
    # second-kind points: w_k = (-1)^k, halved at the ends
    w = np.ones(n)
    w[1::2] = -1.0
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def _diff_matrices(x: np.ndarray, w: np.ndarray, max_order: int) -> list[np.ndarray]:
    """Dense derivative matrices D^(1..max_order) by the recursion of
    barycentric differentiation; diagonals via negative row sums."""
    n = len(x)
    dx = x[:, None] - x[None, :]
    np.fill_diagonal(dx, 1.0)
    wr = w[None, :] / w[:, None]
    mats = [np.eye(n)]
    D_prev = np.eye(n)
    for k in range(1, max_order + 1):
        diag_prev = np.diag(D_prev)
        D = (k / dx) * (wr * diag_prev[:, None] - D_prev)
        np.fill_diagonal(D, 0.0)
        np.fill_diagonal(D, -D.sum(axis=1))
        mats.append(D)
        D_prev = D
    return mats


class Discretization:
    """Chebyshev collocation data for every component of a problem."""

    def __init__(self, problem: PencilProblem, n_phi: int):
        order = 2 * problem.m
        if n_phi < order + 2:
            raise ValueError(f"n_phi must be >= 2m + 2 = {order + 2}")
        self.n_phi = int(n_phi)
        self.intervals = tuple(c.interval for c in problem.components)
        self.nodes = tuple(
            _cheb_nodes(n_phi, d1, d2) for (d1, d2) in self.intervals
        )
        self._weights = _bary_weights(n_phi)
        self.diff_mats = tuple(
            _diff_matrices(xs, self._weights, order) for xs in self.nodes
        )

    @property
    def n_components(self) -> int:
        return len(self.nodes)

    @property
    def size(self) -> int:
        return self.n_phi * self.n_components

    def interp_row(self, component: int, angle: float) -> np.ndarray:
        """Barycentric interpolation row at an angle of one component."""
        x = self.nodes[component]
        row = np.zeros(len(x))
        diff = angle - x
        hit = np.nonzero(np.abs(diff) < 1e-13 * max(1.0, abs(angle)))[0]
        if hit.size:
            row[hit[0]] = 1.0
            return row
        frac = self._weights / diff
        row[:] = frac / frac.sum()
        return row

    def matches(self, problem: PencilProblem) -> bool:
        return self.intervals == tuple(c.interval for c in problem.components)


def discretize(p: PencilProblem, n_phi: int) -> Discretization:
    """Build collocation nodes and derivative matrices for a problem."""
    return Discretization(p, n_phi)


# ---------------------------------------------------------------------------
# assembly


def _falling(s: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= s - i
    return out


class CompiledPencil:
    """T(lambda) reduced to polynomial stacks for fast repeated assembly.

    ``T(lam) = sum_s lam^s B[s] + sum_g exp(i lam ln chi_g) sum_s lam^s G_g[s]``
    where the g-groups collect boundary terms sharing a radial scale
    chi_g != 1 (their constant chi^(-m_row) factor is folded in).
    """

    def __init__(self, p: PencilProblem, d: Discretization):
        if not d.matches(p):
            raise ValueError("discretization was built for a different problem")
        self.problem = p
        self.disc = d
        n = d.n_phi
        ncomp = d.n_components
        size = n * ncomp
        self.size = size
        order = 2 * p.m

        max_pow = order
        base = np.zeros((max_pow + 1, size, size), dtype=complex)
        groups: dict[float, np.ndarray] = {}

        # interior collocation rows
        for j, comp in enumerate(p.components):
            nodes = d.nodes[j]
            interior = np.arange(p.m, n - p.m)
            for (a1, a2), coeff in comp.operator.sorted_terms():
                vals = coeff_values(coeff, nodes[interior])
                block = vals[:, None] * d.diff_mats[j][a1][interior, :]
                base[a2][j * n + interior, j * n:(j + 1) * n] += block

        # boundary rows overwrite the endpoint-adjacent collocation slots
        for row in p.rows:
            j = row.component
            d1, d2 = d.intervals[j]
            if row.kind == "periodic_match":
                j0 = row.match_order
                slot = j0 if j0 < p.m else n - 1 - (j0 - p.m)
                ridx = j * n + slot
                Dj = d.diff_mats[j][j0]
                base[0, ridx, j * n:(j + 1) * n] += Dj[0, :] - Dj[-1, :]
                continue
            anchor = d1 if row.side == "lower" else d2
            lower_rows = sorted(
                (r for r in p.rows
                 if r.component == j and r.side == "lower" and r.kind == "standard"),
                key=lambda r: r.row_order,
            )
            upper_rows = sorted(
                (r for r in p.rows
                 if r.component == j and r.side == "upper" and r.kind == "standard"),
                key=lambda r: r.row_order,
            )
            if row.side == "lower":
                slot = lower_rows.index(row)
            else:
                slot = n - p.m + upper_rows.index(row)
            ridx = j * n + slot

            for term in row.terms:
                k = term.source
                angle = anchor + term.shift
                erow = d.interp_row(k, angle)
                lnchi = math.log(term.chi)
                if term.chi == 1.0:
                    target = base
                else:
                    key = lnchi
                    if key not in groups:
                        groups[key] = np.zeros_like(base)
                    target = groups[key]
                chi_const = term.chi ** (-row.row_order)
                for (a1, a2), coeff in term.op.sorted_terms():
                    cval = complex(coeff_values(coeff, np.array([angle]))[0])
                    rowvec = erow @ d.diff_mats[k][a1]
                    target[a2, ridx, k * n:(k + 1) * n] += chi_const * cval * rowvec

        self._base = base
        self._groups = tuple(sorted(groups.items()))
        self._max_pow = max_pow

    def matrix(self, lam: complex) -> np.ndarray:
        lam = complex(lam)
        T = self._base[0].copy()
        lp = 1.0 + 0j
        for s in range(1, self._max_pow + 1):
            lp *= lam
            if np.any(self._base[s]):
                T += lp * self._base[s]
        for lnchi, stack in self._groups:
            fac = cmath.exp(1j * lam * lnchi)
            lp = 1.0 + 0j
            acc = stack[0].copy()
            for s in range(1, self._max_pow + 1):
                lp *= lam
                acc += lp * stack[s]
            T += fac * acc
        return T

    def derivative(self, lam: complex, s: int = 1) -> np.ndarray:
        lam = complex(lam)
        T = np.zeros((self.size, self.size), dtype=complex)
        for sp in range(s, self._max_pow + 1):
            T += _falling(sp, s) * lam ** (sp - s) * self._base[sp]
        for lnchi, stack in self._groups:
            fac = cmath.exp(1j * lam * lnchi)
            acc = np.zeros_like(T)
            for jj in range(s + 1):
                binom = math.comb(s, jj)
                pref = (1j * lnchi) ** (s - jj)
                for sp in range(jj, self._max_pow + 1):
                    acc += (binom * pref * _falling(sp, jj)
                            * lam ** (sp - jj) * stack[sp])
            T += fac * acc
        return T


def compile_pencil(p: PencilProblem, d: Discretization) -> CompiledPencil:
    return CompiledPencil(p, d)


def assemble(p: PencilProblem, d: Discretization, lam: complex) -> np.ndarray:
    """Dense T(lambda); component-major, node-minor row ordering."""
    return CompiledPencil(p, d).matrix(lam)


def assemble_derivative(p: PencilProblem, d: Discretization, lam: complex,
                        s: int = 1) -> np.ndarray:
    """Exact analytic s-th lambda derivative of T."""
    if s < 1:
        raise ValueError("derivative order s must be >= 1")
    return CompiledPencil(p, d).derivative(lam, s)
