"""Nonlinear eigenvalue of the single-species problem.

The closed-form solution ``u(r) = 2 log cos(k r)`` with ``k = sqrt(J/2)`` is
consistent with the nonlocal constraint only when ``J`` solves

    f(J) = sqrt(2 J) / lam - cot(sqrt(J / 2)) = 0,   0 < J < pi^2 / 2.

``f`` is strictly increasing with ``f(0+) = -inf`` and ``f(pi^2/2 -) > 0``,
so the root is unique.  For large ``lam`` the root crowds ``pi^2/2`` and the
physically interesting quantity is the complement ``gap = pi/2 - k``
(roughly ``pi/lam``).  The solver therefore works in whichever of ``k`` or
``gap`` is the small variable, so both are known to full relative precision.
"""

import math
from dataclasses import dataclass

from .errors import NoConvergence, NonPositiveLambda, OutOfBracket

HALF_PI = 0.5 * math.pi
J_MAX = 0.5 * math.pi ** 2

DEFAULT_TOL = 1e-13
BISECTION_STEPS = 60
NEWTON_STEPS = 10


@dataclass(frozen=True)
class Eigenvalue:
    """Root of the eigenvalue equation for one value of ``lam``.

    Attributes
    ----------
    lam : float
        Ion-number parameter.
    j : float
        Eigenvalue ``J = lam / I`` in ``(0, pi^2/2)``.
    residual : float
        ``eigenvalue_defect(lam, j)`` at the returned root.
    k : float
        Phase rate ``sqrt(j / 2)``.
    gap : float
        ``pi/2 - k``; carried separately because it is the quantity that
        controls the boundary layer and cannot be recovered accurately from
        ``j`` once ``lam`` is large.
    """

    lam: float
    j: float
    residual: float
    k: float
    gap: float

    @property
    def i(self):
        """``I = int_0^1 exp(-u) dr``, equal to ``lam / j``."""
        return self.lam / self.j


def _check_lambda(lam):
    if not (lam > 0.0) or math.isinf(lam):
        raise NonPositiveLambda(f"lambda must be a positive finite number, got {lam!r}")


def eigenvalue_defect(lam, j_candidate):
    """Evaluate ``f(J) = sqrt(2J)/lam - cot(sqrt(J/2))``.

    Raises
    ------
    OutOfBracket
        If ``j_candidate`` is not inside ``(0, pi^2/2)``.
    """
    _check_lambda(lam)
    if not (0.0 < j_candidate < J_MAX):
        raise OutOfBracket(f"J = {j_candidate!r} is outside (0, pi^2/2)")
    x = math.sqrt(0.5 * j_candidate)
    # cot(x) = tan(pi/2 - x) is the better-conditioned form near pi/2
    cot = math.tan(HALF_PI - x) if x > 0.25 * math.pi else 1.0 / math.tan(x)
    return math.sqrt(2.0 * j_candidate) / lam - cot


def _defect_scale(lam, j):
    # magnitude of the two cancelling terms; |f| cannot be resolved below
    # a few ulps of this
    return 1.0 + math.sqrt(2.0 * j) / lam


def _solve_small_variable(g, dg, hi):
    """Root of an increasing ``g`` on ``(0, hi)`` by bisection then Newton."""
    lo = 0.0
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    x = 0.5 * (lo + hi)
    for _ in range(NEWTON_STEPS):
        gx = g(x)
        if gx == 0.0:
            break
        if gx > 0.0:
            hi = x
        else:
            lo = x
        step = gx / dg(x)
        x_new = x - step
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 2.0 * math.ulp(x):
            x = x_new
            break
        x = x_new
    return x


def solve_j(lam, tol=DEFAULT_TOL):
    """Solve the eigenvalue equation for ``J``.

    Parameters
    ----------
    lam : float
        Ion-number parameter, ``lam > 0``.
    tol : float
        Bound on ``|f(J)|`` relative to the size of its two terms
        (``1 + sqrt(2J)/lam``); for ``lam >= 1`` this is an absolute bound.

    Returns
    -------
    Eigenvalue

    Raises
    ------
    NonPositiveLambda
        If ``lam <= 0``.
    NoConvergence
        If the defect cannot be brought below ``tol``.
    """
    _check_lambda(lam)
    if not tol > 0.0:
        raise ValueError("tol must be positive")

    if lam < HALF_PI:
        # small lam: k is small, root of 2k/lam - cot k
        k = _solve_small_variable(
            lambda x: 2.0 * x / lam - 1.0 / math.tan(x),
            lambda x: 2.0 / lam + 1.0 / math.sin(x) ** 2,
            0.25 * math.pi,
        )
        gap = HALF_PI - k
    else:
        # large lam: gap = pi/2 - k is small, root of tan(gap) - (pi - 2 gap)/lam
        gap = _solve_small_variable(
            lambda e: math.tan(e) - (math.pi - 2.0 * e) / lam,
            lambda e: 1.0 / math.cos(e) ** 2 + 2.0 / lam,
            0.25 * math.pi,
        )
        k = HALF_PI - gap

    j = 2.0 * k * k
    if not j < J_MAX:
        raise NoConvergence(f"root for lambda={lam!r} not separable from pi^2/2 in double precision")
    residual = eigenvalue_defect(lam, j)
    if abs(residual) > tol * _defect_scale(lam, j):
        raise NoConvergence(
            f"eigenvalue defect {residual:.3e} above tol {tol:.1e} for lambda={lam!r}",
            residual=residual,
        )
    return Eigenvalue(lam=float(lam), j=j, residual=residual, k=k, gap=gap)
