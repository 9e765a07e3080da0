import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import _oracle
from ionlayer.errors import DomainError
from ionlayer.exact import (
    NearFieldPoint,
    SingleSpeciesSolution,
    boundary_value_u1,
    eval_at_offset,
    eval_du,
    eval_near,
    eval_rho,
    eval_u,
    exp_neg_u_integral,
    first_integral_defect,
)
from ionlayer.quadrature import graded_mesh


@pytest.fixture(scope="module")
def sol4():
    return SingleSpeciesSolution.from_lambda(1e4)


@pytest.mark.parametrize("lam", [1.0, 1e2, 1e4, 1e6])
@pytest.mark.parametrize("t", [0.0, 1e-9, 1e-6, 1e-3, 0.1, 0.5, 0.9])
def test_offset_values_match_mpmath(lam, t):
    sol = SingleSpeciesSolution.from_lambda(lam)
    u, du, rho = eval_at_offset(sol, t)
    ru, rdu, rrho = (float(x) for x in _oracle.u_at_offset(lam, t))
    assert u == pytest.approx(ru, rel=1e-13, abs=1e-15)
    assert du == pytest.approx(rdu, rel=1e-12)
    assert rho == pytest.approx(rrho, rel=1e-12)


def test_r_form_matches_offset_form(sol4):
    r = np.array([0.0, 0.2, 0.49, 0.51, 0.8, 0.999])
    u, du, rho = eval_at_offset(sol4, 1.0 - r)
    assert np.allclose(eval_u(sol4, r), u, rtol=1e-12, atol=1e-15)
    assert np.allclose(eval_du(sol4, r), du, rtol=1e-12, atol=1e-15)
    assert np.allclose(eval_rho(sol4, r), rho, rtol=1e-12)


def test_center_and_wall(sol4):
    assert eval_u(sol4, 0.0) == 0.0
    assert eval_du(sol4, 0.0) == 0.0
    # u(1) from the closed form equals the nonlocal identity value
    assert eval_u(sol4, 1.0) == pytest.approx(boundary_value_u1(sol4), rel=1e-14)
    assert eval_du(sol4, 1.0) == pytest.approx(-1e4, rel=1e-12)


@given(st.floats(min_value=1.0, max_value=1e7))
@settings(max_examples=40, deadline=None)
def test_monotone_on_graded_grid(lam):
    sol = SingleSpeciesSolution.from_lambda(lam)
    r = graded_mesh(1.0 / lam, 500)
    assert np.all(np.diff(eval_u(sol, r)) < 0)
    assert np.all(np.diff(eval_du(sol, r)) < 0)
    assert np.all(np.diff(eval_rho(sol, r)) > 0)


@given(st.floats(min_value=1.0, max_value=1e7))
@settings(max_examples=40, deadline=None)
def test_first_integral(lam):
    sol = SingleSpeciesSolution.from_lambda(lam)
    r = graded_mesh(1.0 / lam, 400)
    assert np.max(np.abs(first_integral_defect(sol, r))) <= 1e-10 * (1.0 + lam ** 2)


@pytest.mark.parametrize("lam", [1.0, 1e3, 1e6])
def test_finite_difference_slope(lam):
    sol = SingleSpeciesSolution.from_lambda(lam)
    for r in (0.2, 0.5, 0.8):
        h = 1e-6
        fd = (eval_u(sol, r + h) - eval_u(sol, r - h)) / (2 * h)
        assert fd == pytest.approx(eval_du(sol, r), rel=1e-6)
    t, h = min(0.5, 3.0 / lam), 1e-6 / lam
    fd = (eval_at_offset(sol, t - h)[0] - eval_at_offset(sol, t + h)[0]) / (2 * h)
    assert fd == pytest.approx(eval_at_offset(sol, t)[1], rel=1e-6)


@pytest.mark.parametrize("lam", [1.0, 1e2, 1e4, 1e6])
def test_quadrature_of_exp_neg_u(lam):
    sol = SingleSpeciesSolution.from_lambda(lam)
    assert exp_neg_u_integral(sol) == pytest.approx(sol.i, rel=1e-8)
    if lam <= 1e4:
        assert sol.i == pytest.approx(float(_oracle.i_integral(lam)), rel=1e-10)


def test_total_charge(sol4):
    # int rho = lam, via u'(0) - u'(1)
    assert eval_du(sol4, 0.0) - eval_du(sol4, 1.0) == pytest.approx(1e4, rel=1e-13)


def test_near_field_point_offset():
    pt = NearFieldPoint(2.0, 3.0, 1e6)
    assert pt.offset == pytest.approx(2e-18, rel=1e-14)
    sol = SingleSpeciesSolution.from_lambda(1e6)
    u, du, _ = eval_near(sol, pt)
    mp_u = _oracle.u_at_offset(1e6, mp.mpf(2) * mp.mpf(10) ** -18)[0]
    assert u == pytest.approx(float(mp_u), rel=1e-13)


def test_domain_errors(sol4):
    with pytest.raises(DomainError):
        eval_u(sol4, 1.5)
    with pytest.raises(DomainError):
        eval_at_offset(sol4, -0.1)
    with pytest.raises(DomainError):
        eval_near(SingleSpeciesSolution.from_lambda(10.0), NearFieldPoint(1.0, 1.0, 1e4))
