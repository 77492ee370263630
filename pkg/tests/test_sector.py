"""Polar finite-difference solver: grids, manufactured cases, norms, scans."""
import math

import numpy as np
import pytest

from cornerpencil.errors import GridShiftMismatch
from cornerpencil.sector import (PolarGrid, SectorProblem2D, convergence_study,
                                 fit_exponent, grid_function, manufactured_case,
                                 refine_grid, resolvent_scan, ring_norms,
                                 solve_sector, weighted_norm)

D = math.pi / 2
NONLOCAL = ((0.5, D / 2), (0.5, D / 2))
DIRICHLET = ((0.0, D / 2), (0.0, D / 2))


def zero_rhs(r, phi):
    return np.zeros_like(np.asarray(r), dtype=complex)


def one_rhs(r, phi):
    return np.ones_like(np.asarray(r), dtype=complex)


def zero_bc(phi):
    return np.zeros_like(np.asarray(phi), dtype=complex)


# ---------------------------------------------------------------------------
# validation and grids


def test_problem_validation():
    with pytest.raises(ValueError, match="opening"):
        SectorProblem2D(d=7.0, sides=NONLOCAL)
    with pytest.raises(ValueError, match="inner cutoff"):
        SectorProblem2D(d=D, r0=2.0, sides=NONLOCAL)
    with pytest.raises(ValueError, match="pair per side"):
        SectorProblem2D(d=D, sides=((0.5, D / 2),))
    with pytest.raises(ValueError, match="interior"):
        SectorProblem2D(d=D, sides=((0.5, D), (0.5, D / 2)))


def test_grid_shift_must_land_on_nodes():
    g = PolarGrid(16, 33)
    assert g.shift_steps(D, D / 2) == 16
    with pytest.raises(GridShiftMismatch):
        g.shift_steps(D, D / 3)


def test_grid_refinement_keeps_domain():
    g = PolarGrid(32, 33)
    r1 = g.radii(1.0)
    g2 = refine_grid(g)
    r2 = g2.radii(1.0)
    assert g2.n_r == 64 and g2.n_a == 65
    assert abs(r1[0] - r2[0]) < 1e-15
    assert abs(r1[-1] - r2[-1]) < 1e-15


# ---------------------------------------------------------------------------
# solves


def test_harmonic_dirichlet_mode():
    # u = r^{pi/d} sin(pi phi / d) is the exact zero-rhs solution
    prob = SectorProblem2D(d=D, sides=DIRICHLET, rhs=zero_rhs,
                           dirichlet=lambda phi: np.sin(np.pi * np.asarray(phi) / D) + 0j)
    g = PolarGrid(48, 49)
    sol = solve_sector(prob, g)
    exact = grid_function(prob, g, lambda r, phi: r ** 2 * np.sin(2 * phi) + 0j)
    err = np.max(np.abs(sol.values - exact.values))
    assert err < 5e-3
    assert sol.residual < 1e-10


def test_nonlocal_rows_satisfied():
    prob = SectorProblem2D(d=D, sides=NONLOCAL, rhs=one_rhs, dirichlet=zero_bc)
    g = PolarGrid(32, 33)
    sol = solve_sector(prob, g)
    s = g.shift_steps(D, D / 2)
    # interior rings: u(r, 0) = alpha u(r, d/2) and u(r, d) = alpha u(r, d/2)
    assert np.max(np.abs(sol.values[:-1, 0] - 0.5 * sol.values[:-1, s])) < 1e-12
    assert np.max(np.abs(sol.values[:-1, -1] - 0.5 * sol.values[:-1, -1 - s])) < 1e-12


def test_solve_rejects_incompatible_grid():
    prob = SectorProblem2D(d=D, sides=((0.5, D / 3), (0.5, D / 2)),
                           rhs=one_rhs, dirichlet=zero_bc)
    with pytest.raises(GridShiftMismatch):
        solve_sector(prob, PolarGrid(16, 33))


# ---------------------------------------------------------------------------
# manufactured cases and convergence


def test_manufactured_unknown_name():
    with pytest.raises(ValueError, match="unknown"):
        manufactured_case("no_such_case")


def test_compliant_case_satisfies_traces():
    prob, exact = manufactured_case("smooth_compliant")
    g = PolarGrid(32, 33)
    vals = grid_function(prob, g, exact).values
    s = g.shift_steps(prob.d, prob.sides[0][1])
    assert np.max(np.abs(vals[:, 0] - 0.5 * vals[:, s])) < 1e-13
    assert np.max(np.abs(vals[:, -1] - 0.5 * vals[:, -1 - s])) < 1e-13


def test_zero_case_short_circuits():
    grids = [PolarGrid(16, 17), PolarGrid(32, 33), PolarGrid(64, 65)]
    rec = convergence_study("zero", grids)
    assert max(rec.l2_errors) < 1e-12
    assert "not-applicable" in rec.note


def test_convergence_requires_doubling():
    with pytest.raises(ValueError):
        convergence_study("smooth_compliant", [PolarGrid(16, 17), PolarGrid(24, 25),
                                               PolarGrid(32, 33)])


# ---------------------------------------------------------------------------
# ring norms, exponent fits, scans


def fit_problem():
    return SectorProblem2D(d=D, sides=NONLOCAL, rhs=zero_rhs,
                           dirichlet=lambda phi: np.sin(2 * np.asarray(phi)) + 1.0 + 0j)


def test_ring_norms_shape_and_positivity():
    sol = solve_sector(fit_problem(), PolarGrid(32, 33))
    rings = ring_norms(sol)
    assert len(rings) == 32
    assert all(r > 0 for r, _ in rings)
    assert rings[0][0] < rings[-1][0]


def test_fit_exponent_window_guards():
    sol = solve_sector(fit_problem(), PolarGrid(32, 33))
    with pytest.raises(ValueError):
        fit_exponent(sol, (1e-3, 0.9))        # beyond R/4
    with pytest.raises(ValueError):
        fit_exponent(sol, (1e-9, 0.2))        # below the innermost ring


def test_fit_exponent_pure_mode():
    # Dirichlet data sin(2 phi) drives u = r^2 sin(2 phi): beta = 2 exactly
    prob = SectorProblem2D(d=D, sides=DIRICHLET, rhs=zero_rhs,
                           dirichlet=lambda phi: np.sin(2 * np.asarray(phi)) + 0j)
    sol = solve_sector(prob, PolarGrid(48, 49))
    beta, r2 = fit_exponent(sol, (1e-3, 0.25))
    assert abs(beta - 2.0) < 0.05
    assert r2 > 0.999


def test_resolvent_scan_guards():
    prob = SectorProblem2D(d=D, sides=NONLOCAL, rhs=one_rhs, dirichlet=zero_bc)
    g = PolarGrid(16, 17)
    with pytest.raises(ValueError):
        resolvent_scan(prob, 2.0, [10, 20, 30, 40, 50], g)     # |h| >= pi/2
    with pytest.raises(ValueError):
        resolvent_scan(prob, 0.0, [10, 20, 30], g)             # too few p
    with pytest.raises(ValueError):
        resolvent_scan(prob, 0.0, [10, 20, 15, 40, 50], g)     # not increasing
    bad = SectorProblem2D(d=D, sides=NONLOCAL, rhs=zero_rhs, dirichlet=zero_bc)
    with pytest.raises(ValueError, match="vanishes"):
        resolvent_scan(bad, 0.0, [10, 20, 30, 40, 50], g)


def test_condition_growth_near_critical_coupling():
    # d = 3 sits near the critical opening; strong coupling inflates kappa
    d3 = 3.0
    sides = lambda a: ((a, 1.5), (a, 1.5))
    g = PolarGrid(48, 41)
    conds = {}
    for a in (0.05, 0.9):
        prob = SectorProblem2D(d=d3, sides=sides(a), rhs=one_rhs, dirichlet=zero_bc)
        conds[a] = solve_sector(prob, g).cond_estimate
    assert conds[0.9] / conds[0.05] > 10.0


# ---------------------------------------------------------------------------
# weighted norms


def unit_solution(g):
    from cornerpencil.sector import GridSolution
    rs, phis = g.radii(1.0), g.angles(D)
    return GridSolution(values=np.ones((g.n_r, g.n_a), dtype=complex), rs=rs,
                        phis=phis, residual=0.0, cond_estimate=1.0, stats={})


def test_weighted_norm_closed_form():
    # u = 1: the k = 0 H-norm^2 is the area integral of r^{2a}, known exactly
    a = 0.5
    errs = []
    for n_r in (64, 256):
        sol = unit_solution(PolarGrid(n_r, 17))
        got = weighted_norm(sol, a, 0, "H")
        r_lo, r_hi = sol.rs[0], sol.rs[-1]
        want = math.sqrt(D * (r_hi ** (2 * a + 2) - r_lo ** (2 * a + 2))
                         / (2 * a + 2))
        errs.append(abs(got - want) / want)
    assert errs[1] < 1e-3
    assert errs[1] < 0.25 * errs[0]       # second-order quadrature in ln r


def test_weighted_norm_flavor_identity():
    sol = solve_sector(fit_problem(), PolarGrid(32, 33))
    h = weighted_norm(sol, 0.7, 0, "H")
    e = weighted_norm(sol, 0.7, 0, "E")
    # at k = 0 both weights coincide up to the extra +1 term: E^2 = 2 H^2
    assert abs(e ** 2 - 2 * h ** 2) < 1e-12 * e ** 2


def test_weighted_norm_shift_identity():
    sol = solve_sector(fit_problem(), PolarGrid(32, 33))
    # multiplying the weight exponent shifts the integrand by r^{2}: compare
    # a = 1 against manual reweighting of a = 0 values
    v0 = weighted_norm(sol, 0.0, 0, "H")
    v1 = weighted_norm(sol, 1.0, 0, "H")
    scaled = type(sol)(values=sol.values * sol.rs[:, None], rs=sol.rs,
                       phis=sol.phis, residual=0.0, cond_estimate=1.0, stats={})
    assert abs(weighted_norm(scaled, 0.0, 0, "H") - v1) < 1e-12 * (1 + v1)
    assert v0 > 0


def test_weighted_norm_input_guards():
    sol = solve_sector(fit_problem(), PolarGrid(16, 17))
    with pytest.raises(ValueError):
        weighted_norm(sol, 0.0, 3, "H")
    with pytest.raises(ValueError):
        weighted_norm(sol, 0.0, 0, "X")
