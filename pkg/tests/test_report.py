"""Weight-line verdicts, strip scans, singular functions, adjoint symmetry."""
import math

import numpy as np
import pytest

from cornerpencil import (NepOptions, Rectangle, WeightLine, adjoint_pencil,
                          adjoint_symmetry_check, builtin_problem, discretize,
                          eval_singular, fredholm_verdict, full_circle_from_symbol,
                          jordan_system, singular_functions, strip_scan,
                          weight_transition_report)
from cornerpencil.errors import LineNotClean, OutOfDomain, UnsupportedProblemClass

from oracles import fd_laplacian


def test_weight_line_beta():
    wl = WeightLine(a=1.0, l=0, m=1)
    assert wl.beta == 0.0
    assert WeightLine(a=2.5, l=1, m=1).beta == 0.5
    with pytest.raises(ValueError):
        WeightLine(a=1.0, l=-1, m=1)


def test_verdict_free_line(dirichlet_pi64):
    p, d = dirichlet_pi64
    v = fredholm_verdict(p, d, WeightLine(a=1.0, l=0, m=1))
    assert v.status == "fredholm"
    assert v.witnesses == ()


def test_verdict_obstructed_line(periodic64):
    p, d = periodic64
    v = fredholm_verdict(p, d, WeightLine(a=1.0, l=0, m=1))
    assert v.status == "not_fredholm"
    assert len(v.witnesses) == 1 and abs(v.witnesses[0]) < 1e-7
    # the obstruction on a full-circle problem is the non-closed image
    assert "image not closed" in v.notes


# ---------------------------------------------------------------------------
# strip scans


def test_strip_scan_finds_semisimple_pair(periodic64):
    p, d = periodic64
    recs = strip_scan(p, d, -1.25, 0.0)
    assert len(recs) == 1
    rec = recs[0]
    assert abs(rec.lam - (-1j)) < 1e-8
    assert [c.rank for c in rec.chains] == [1, 1]


def test_strip_scan_rejects_dirty_lower_line(periodic64):
    p, d = periodic64
    with pytest.raises(LineNotClean):
        strip_scan(p, d, -1.0, -0.5)


def test_strip_scan_band_ordering(dirichlet_pi64):
    p, d = dirichlet_pi64
    recs = strip_scan(p, d, -2.5, -0.5)
    assert [round(r.lam.imag) for r in recs] == [-2, -1]


# ---------------------------------------------------------------------------
# singular functions


def test_singular_functions_power_form(periodic64):
    p, d = periodic64
    rec = jordan_system(p, d, -1j)
    funcs = singular_functions(rec, d)
    assert len(funcs) == 2
    # r^{i(-i)} psi = r * (combo of cos, sin): harmonic, linear in (x, y)
    for f in funcs:
        def u(x, y):
            r = math.hypot(x, y)
            return eval_singular(f, (r, math.atan2(y, x) % (2 * math.pi)))
        assert abs(fd_laplacian(u, 0.4, 0.7, h=1e-4)) < 1e-5
        v1 = u(0.2, 0.3)
        v2 = u(0.4, 0.6)
        assert abs(v2 - 2 * v1) < 1e-9 * (1 + abs(v2))   # homogeneity degree 1


def test_singular_function_log_level(periodic64):
    p, d = periodic64
    rec = jordan_system(p, d, 0.0)
    funcs = singular_functions(rec, d)
    ks = sorted(f.k for f in funcs)
    assert ks == [0, 1]
    f0 = next(f for f in funcs if f.k == 0)
    f1 = next(f for f in funcs if f.k == 1)
    # level 0 is a constant; level 1 grows like i ln r times that constant
    c = eval_singular(f0, (1.0, 1.0))
    assert abs(eval_singular(f0, (0.01, 2.0)) - c) < 1e-9 * (1 + abs(c))
    g1 = eval_singular(f1, (1.0, 1.0))
    g2 = eval_singular(f1, (math.e, 1.0))
    assert abs((g2 - g1) - 1j * c) < 1e-7 * (1 + abs(c))


def test_eval_singular_domain_guards(dirichlet_pi64, periodic64):
    p, d = dirichlet_pi64
    rec = jordan_system(p, d, -1j)
    f = singular_functions(rec, d)[0]
    with pytest.raises(OutOfDomain):
        eval_singular(f, (0.0, 1.0))
    with pytest.raises(OutOfDomain):
        eval_singular(f, (1.0, -0.3))
    with pytest.raises(OutOfDomain):
        eval_singular(f, (1.0, math.pi + 0.3))

    p2, d2 = periodic64
    rec2 = jordan_system(p2, d2, -1j)
    g = singular_functions(rec2, d2)[0]
    a = eval_singular(g, (0.7, 1.2))
    b = eval_singular(g, (0.7, 1.2 + 2 * math.pi))   # canonical angle wrap
    assert abs(a - b) < 1e-12 * (1 + abs(a))


# ---------------------------------------------------------------------------
# weight transitions


def test_transition_obstructed_vs_transfer(periodic64):
    p, d = periodic64
    # lines h1 = -0.75, h2 = -1.25 straddle the eigenvalue at -i
    rep = weight_transition_report(p, d, (1.25, 1), (0.75, 1), m=1)
    assert rep.status == "obstructed"
    assert len(rep.records) == 1
    assert len(rep.obstructions) == 2

    clean = weight_transition_report(p, d, (1.6, 1), (1.2, 1), m=1)
    assert clean.status == "regularity_transfer"
    assert clean.obstructions == ()

    with pytest.raises(ValueError, match="h2 < h1"):
        weight_transition_report(p, d, (0.75, 1), (1.25, 1), m=1)


# ---------------------------------------------------------------------------
# adjoint symmetry


def test_adjoint_requires_full_circle(ex21_64):
    p, _ = ex21_64
    with pytest.raises(UnsupportedProblemClass):
        adjoint_pencil(p)


def test_adjoint_involution_on_symbol():
    p = full_circle_from_symbol(-1.0, -0.6j, -1.0)
    q = adjoint_pencil(adjoint_pencil(p))
    assert q.symbol == p.symbol


def test_adjoint_symmetry_empty_rect(periodic64):
    p, d = periodic64
    rep = adjoint_symmetry_check(p, d, Rectangle(1.0, 2.0, -0.5, 0.5))
    assert rep.spectrum == ()
    assert rep.hausdorff == 0.0


def test_adjoint_symmetry_drifted_symbol():
    p = full_circle_from_symbol(-1.0, -0.6j, -1.0)
    d = discretize(p, 64)
    rep = adjoint_symmetry_check(p, d, Rectangle(-0.5, 0.5, -1.5, 1.5),
                                 NepOptions(probe_rank=16))
    assert rep.hausdorff < 1e-6
    assert len(rep.spectrum) == 3
