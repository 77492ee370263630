"""Contour counting, Beyn extraction, refinement, line certification."""
import math

import numpy as np
import pytest

from cornerpencil import (NepOptions, Rectangle, beyn_eigs, builtin_problem,
                          count_in_rectangle, discretize, line_free, refine)
from cornerpencil.errors import ContourTooClose, NoConvergence

from oracles import dirichlet_lams


def test_options_validation():
    with pytest.raises(ValueError):
        NepOptions(quad_points=0)
    with pytest.raises(ValueError):
        NepOptions(rank_tol=2.0)
    with pytest.raises(ValueError):
        NepOptions(residual_tol=-1.0)


def test_rectangle_validation_and_contains():
    with pytest.raises(ValueError):
        Rectangle(1.0, 0.0, 0.0, 1.0)
    rect = Rectangle(-1.0, 1.0, -2.0, 0.0)
    assert rect.contains(-1j)
    assert not rect.contains(2.0 - 1j)
    assert rect.contains(1.05 - 1j, pad=0.1)


def test_count_periodic_strips(periodic64):
    p, d = periodic64
    assert count_in_rectangle(p, d, Rectangle(-0.5, 0.5, -1.5, -0.5)) == 2
    assert count_in_rectangle(p, d, Rectangle(-0.5, 0.5, -2.6, -0.4)) == 4
    assert count_in_rectangle(p, d, Rectangle(-0.5, 0.5, -0.6, -0.4)) == 0


def test_count_dirichlet(dirichlet_pi64):
    p, d = dirichlet_pi64
    assert count_in_rectangle(p, d, Rectangle(-0.5, 0.5, -1.5, -0.5)) == 1


def test_contour_through_eigenvalue_raises(periodic64):
    p, d = periodic64
    # bottom edge passes within 1e-9 of the eigenvalue at 0
    with pytest.raises(ContourTooClose):
        count_in_rectangle(p, d, Rectangle(-0.5, 0.5, -1e-9, 1.0))


def test_beyn_dirichlet_closed_form():
    d_open = 1.0
    p = builtin_problem("dirichlet_laplace", {"d": d_open})
    d = discretize(p, 64)
    want = [z for z in dirichlet_lams(d_open, 4) if z.imag < 0]
    lo = min(z.imag for z in want) - 1.0
    ests = beyn_eigs(p, d, Rectangle(-0.5, 0.5, lo, -0.5), NepOptions(probe_rank=16))
    got = [e.lam for e in ests]
    assert len(got) == len(want)
    for g, w in zip(got, want):
        assert abs(g - w) < 1e-8
    assert all(e.resolution_stable for e in ests)


def test_beyn_symmetric_rect_handles_moment_cancellation(periodic64):
    # T(lam) = T(-lam): in a +-symmetric rectangle the zeroth moment
    # cancels exactly and extraction must fall back to direct localization
    p, d = periodic64
    ests = beyn_eigs(p, d, Rectangle(-0.6, 0.6, -1.7, 1.7),
                     NepOptions(probe_rank=16))
    assert len(ests) == 3
    for g, w in zip([e.lam for e in ests], [-1j, 0.0, 1j]):
        assert abs(g - w) < 1e-7


def test_beyn_probe_rank_guard(periodic64):
    p, d = periodic64
    # 5 eigenvalue groups / count 9 with probe_rank 4 cannot be extracted
    with pytest.raises(ValueError, match="probe_rank"):
        beyn_eigs(p, d, Rectangle(-0.5, 4.5, -4.5, 0.5), NepOptions(probe_rank=4))


def test_refine_polishes_perturbed_start(periodic64):
    p, d = periodic64
    est = refine(p, d, -0.02 - 1.03j)
    assert abs(est.lam - (-1j)) < 1e-10
    assert est.sigma_min < 1e-10
    assert est.resolution_stable


def test_refine_rejects_start_without_nearby_eigenvalue(periodic64):
    p, d = periodic64
    with pytest.raises(NoConvergence):
        refine(p, d, 3.0 - 0.5j)


def test_line_free_statuses(periodic64):
    p, d = periodic64
    v = line_free(p, d, -0.5, 10.0)
    assert v.status == "free"
    v0 = line_free(p, d, 0.0, 10.0)
    assert v0.status == "eigenvalue_found"
    assert abs(v0.eigenvalue) < 1e-7


def test_estimates_sorted_by_im_then_re(periodic64):
    p, d = periodic64
    ests = beyn_eigs(p, d, Rectangle(-0.5, 4.5, -4.5, 0.5),
                     NepOptions(probe_rank=16))
    keys = [(e.lam.imag, e.lam.real) for e in ests]
    assert keys == sorted(keys)
