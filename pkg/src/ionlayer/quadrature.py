"""Composite Simpson quadrature on meshes graded toward r = 1.

Integrands that live in the boundary layer are written as functions of the
distance ``t = 1 - r`` so that no precision is lost forming ``1 - r``.  The
mesh is uniform in ``s = log(t + t0)``, which puts a fixed fraction of nodes
in every decade of ``t`` down to the layer scale ``t0``.
"""

import math

import numpy as np

from .errors import QuadratureStall


def graded_offsets(t_lo, t_hi, t0, n):
    """Return ``n + 1`` offsets from ``t_hi`` down to ``t_lo``, log-graded.

    The spacing is proportional to ``t + t0``, so nodes cluster near
    ``t_lo`` when ``t0`` is small.  Endpoints are exact.
    """
    s = np.linspace(0.0, 1.0, n + 1)
    base = t_lo + t0
    log_ratio = math.log1p((t_hi - t_lo) / base)
    t = t_lo + base * np.expm1(log_ratio * (1.0 - s))
    t[0] = t_hi
    t[-1] = t_lo
    return t


def graded_mesh(t0, n):
    """Nodes on [0, 1] with ``r[0] = 0``, ``r[-1] = 1`` graded toward 1."""
    r = 1.0 - graded_offsets(0.0, 1.0, t0, n)
    r[0] = 0.0
    r[-1] = 1.0
    return r


def _simpson_uniform(y, h):
    # y has odd length
    return h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum())


def simpson_boundary(f_of_t, t_lo, t_hi, t0, n):
    """Simpson estimate of ``int_{t_lo}^{t_hi} f(t) dt`` on a graded mesh.

    ``f_of_t`` must accept a numpy array of offsets.  ``n`` is rounded up to
    an even number of panels.
    """
    if n % 2:
        n += 1
    # log1p/expm1 keep the mesh accurate when t_hi - t_lo is far below t0
    base = t_lo + t0
    log_ratio = math.log1p((t_hi - t_lo) / base)
    s = np.linspace(0.0, 1.0, n + 1)
    t = t_lo + base * np.expm1(log_ratio * s)
    t[0] = t_lo
    t[-1] = t_hi
    # dt/ds = (t + t0) * log_ratio
    y = f_of_t(t) * (t + t0) * log_ratio
    return _simpson_uniform(y, 1.0 / n)


def integrate_boundary(f_of_t, t_lo, t_hi, t0, rtol=1e-8, n0=64, max_doublings=14):
    """Integrate with repeated mesh doubling until the relative change is ``<= rtol``.

    Raises
    ------
    QuadratureStall
        If ``max_doublings`` refinements do not settle the estimate.
    """
    if t_hi <= t_lo:
        return 0.0
    n = n0
    prev = simpson_boundary(f_of_t, t_lo, t_hi, t0, n)
    change = math.inf
    for _ in range(max_doublings):
        n *= 2
        cur = simpson_boundary(f_of_t, t_lo, t_hi, t0, n)
        change = abs(cur - prev)
        if change <= rtol * abs(cur):
            return cur
        prev = cur
    raise QuadratureStall(
        f"graded Simpson did not reach rtol={rtol:.1e} with {n} panels "
        f"(last change {change:.3e})"
    )
