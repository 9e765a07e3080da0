import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ionlayer.errors import QuadratureStall
from ionlayer.quadrature import graded_mesh, graded_offsets, integrate_boundary, simpson_boundary


@given(st.floats(min_value=1e-12, max_value=1.0), st.integers(min_value=2, max_value=500))
@settings(max_examples=100, deadline=None)
def test_mesh_endpoints_and_order(t0, n):
    r = graded_mesh(t0, n)
    assert r[0] == 0.0 and r[-1] == 1.0
    assert len(r) == n + 1
    assert np.all(np.diff(r) > 0)


def test_mesh_clusters_toward_one():
    r = graded_mesh(1e-4, 1000)
    # a fixed share of nodes per decade of 1 - r
    assert np.sum(1.0 - r < 1e-3) > 200


def test_offsets_thin_interval_are_accurate():
    # interval far below the grading scale: no cancellation in the node positions
    import mpmath as mp

    t = graded_offsets(0.0, 1e-12, 2e-4, 4)
    base, hi = mp.mpf(2e-4), mp.mpf(1e-12)
    ref = [float(base * mp.expm1(mp.log1p(hi / base) * (1 - mp.mpf(i) / 4))) for i in range(5)]
    assert np.allclose(t, ref, rtol=1e-13, atol=0)


@pytest.mark.parametrize("t0", [1e-6, 1e-3, 0.5])
def test_polynomials_exact(t0):
    # Simpson in s is not exact for polynomials in t, but converges fast
    val = integrate_boundary(lambda t: t ** 3, 0.0, 1.0, t0, rtol=1e-12)
    assert val == pytest.approx(0.25, rel=1e-10)


def test_boundary_layer_integrand():
    e = 1e-6
    # int_0^1 e / (e + t)^2 dt = 1 - e / (1 + e)
    val = integrate_boundary(lambda t: e / (e + t) ** 2, 0.0, 1.0, e, rtol=1e-10)
    assert val == pytest.approx(1.0 - e / (1.0 + e), rel=1e-9)


def test_fourth_order_convergence():
    f = lambda t: np.exp(-t) / (0.01 + t)
    ref = integrate_boundary(f, 0.0, 1.0, 0.01, rtol=1e-14)
    errs = [abs(simpson_boundary(f, 0.0, 1.0, 0.01, n) - ref) for n in (16, 32, 64)]
    rates = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert all(3.5 < p < 4.5 for p in rates)


def test_empty_interval():
    assert integrate_boundary(np.sin, 0.5, 0.5, 0.1) == 0.0


def test_stall():
    with pytest.raises(QuadratureStall):
        integrate_boundary(lambda t: np.sign(np.sin(1e4 * t)), 0.0, 1.0, 0.1, rtol=1e-14, max_doublings=3)
