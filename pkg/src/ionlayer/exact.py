"""Closed-form single-species solution.

With ``k = sqrt(J/2)`` the solution of ``-u'' = lam exp(-u) / int exp(-u)``,
``u(0) = u'(0) = 0`` is

    u(r)   = 2 log cos(k r)
    u'(r)  = -2 k tan(k r)
    rho(r) = J sec^2(k r).

Near ``r = 1`` the argument ``k r`` approaches ``pi/2`` and ``cos(k r)`` is of
size ``pi/lam``.  Evaluations for ``r >= 1/2`` are therefore routed through
``cos(k r) = sin(gap + k (1 - r))`` with the precisely known ``gap = pi/2 - k``,
and :func:`eval_at_offset` accepts the distance ``1 - r`` directly for points
too close to the boundary to be represented as a float ``r``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .eigenvalue import DEFAULT_TOL, Eigenvalue, solve_j
from .errors import DomainError, NonPositiveLambda
from .quadrature import integrate_boundary

__all__ = [
    "SingleSpeciesSolution",
    "NearFieldPoint",
    "eval_u",
    "eval_du",
    "eval_rho",
    "eval_at_offset",
    "eval_near",
    "first_integral_defect",
    "boundary_value_u1",
    "exp_neg_u_integral",
]


@dataclass(frozen=True)
class SingleSpeciesSolution:
    """Exact solution, fully determined by its eigenvalue."""

    eig: Eigenvalue
    k: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "k", self.eig.k)

    @classmethod
    def from_lambda(cls, lam, tol=DEFAULT_TOL):
        return cls(solve_j(lam, tol))

    @property
    def lam(self):
        return self.eig.lam

    @property
    def j(self):
        return self.eig.j

    @property
    def gap(self):
        return self.eig.gap

    @property
    def i(self):
        return self.eig.i


@dataclass(frozen=True)
class NearFieldPoint:
    """Boundary-approaching point ``r = 1 - p * lam**(-alpha)``.

    ``offset`` holds ``1 - r`` exactly as computed from ``p``, ``alpha`` and
    ``lam``; ``r`` itself rounds to 1.0 once the offset drops below about
    1e-16, so evaluations should go through the offset.
    """

    p: float
    alpha: float
    lam: float
    offset: float = field(init=False)
    r: float = field(init=False)

    def __post_init__(self):
        if not (self.lam > 0):
            raise NonPositiveLambda(f"lambda must be positive, got {self.lam!r}")
        if not (self.p > 0 and self.alpha > 0):
            raise DomainError("p and alpha must be positive")
        log_offset = math.log(self.p) - self.alpha * math.log(self.lam)
        if not log_offset < 0.0:
            raise DomainError(
                f"p = {self.p!r} must be below lambda**alpha = {self.lam ** self.alpha!r}"
            )
        offset = math.exp(log_offset)
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "r", 1.0 - offset)


def _as_array(r):
    arr = np.asarray(r, dtype=float)
    if not np.all((arr >= 0.0) & (arr <= 1.0)):
        raise DomainError("r must lie in [0, 1]")
    return arr


def _out(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def _phase(sol, r):
    """Return ``(log cos(kr), tan(kr), cos(kr)**2)`` accurately on [0, 1]."""
    k = sol.k
    inner = r < 0.5
    with np.errstate(divide="ignore"):
        x = np.where(inner, k * r, 0.0)
        # boundary branch angle: gap + k(1 - r) equals pi/2 - k r
        y = np.where(inner, 0.5, sol.gap + k * (1.0 - r))
        half = np.sin(0.5 * x)
        log_cos = np.where(inner, np.log1p(-2.0 * half * half), np.log(np.sin(y)))
        tan = np.where(inner, np.tan(x), 1.0 / np.tan(y))
        cos2 = np.where(inner, np.cos(x) ** 2, np.sin(y) ** 2)
    return log_cos, tan, cos2


def eval_u(sol, r):
    """``u(r) = 2 log cos(k r)``; non-positive, zero only at ``r = 0``."""
    arr = _as_array(r)
    log_cos, _, _ = _phase(sol, arr)
    return _out(2.0 * log_cos, r)


def eval_du(sol, r):
    """``u'(r) = -2 k tan(k r)``."""
    arr = _as_array(r)
    _, tan, _ = _phase(sol, arr)
    return _out(-2.0 * sol.k * tan, r)


def eval_rho(sol, r):
    """Net charge density ``rho(r) = J sec^2(k r)``, equal to ``-u''``."""
    arr = _as_array(r)
    _, _, cos2 = _phase(sol, arr)
    return _out(sol.j / cos2, r)


def eval_at_offset(sol, t):
    """Evaluate ``(u, u', rho)`` at ``r = 1 - t`` given the offset ``t``.

    Accurate for arbitrarily small ``t > 0``, including offsets for which
    ``1 - t`` rounds to 1.0.
    """
    arr = np.asarray(t, dtype=float)
    if not np.all((arr >= 0.0) & (arr <= 1.0)):
        raise DomainError("offset must lie in [0, 1]")
    y = sol.gap + sol.k * arr
    s = np.sin(y)
    u = 2.0 * np.log(s)
    du = -2.0 * sol.k / np.tan(y)
    rho = sol.j / (s * s)
    if np.ndim(t) == 0:
        return float(u), float(du), float(rho)
    return u, du, rho


def eval_near(sol, pt):
    """``(u, u', rho)`` at a :class:`NearFieldPoint`."""
    if not math.isclose(pt.lam, sol.lam, rel_tol=1e-15):
        raise DomainError("near-field point and solution use different lambda")
    return eval_at_offset(sol, pt.offset)


def first_integral_defect(sol, r):
    """``u'^2 / 2 - J (exp(-u) - 1)``, identically zero for the exact solution."""
    u = np.asarray(eval_u(sol, r))
    du = np.asarray(eval_du(sol, r))
    out = 0.5 * du * du - sol.j * np.expm1(-u)
    return _out(out, r)


def boundary_value_u1(sol):
    """``u(1)`` via the nonlocal identity ``-log(1 + lam I / 2)``."""
    return -math.log1p(0.5 * sol.lam * sol.i)


def exp_neg_u_integral(sol, rtol=1e-10):
    """``int_0^1 exp(-u)`` by graded-mesh Simpson; an independent route to ``I``."""
    t0 = sol.gap / sol.k

    def integrand(t):
        s = np.sin(sol.gap + sol.k * t)
        return 1.0 / (s * s)

    return integrate_boundary(integrand, 0.0, 1.0, t0, rtol=rtol)
