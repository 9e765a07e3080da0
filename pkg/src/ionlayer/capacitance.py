"""Double-layer capacitance of boundary-adjacent regions.

For a region ``K = [r, 1]`` the capacitance is the normalized charge it
contains divided by the largest potential drop across it,

    C(K) = |int_K rho / lam| / max_{x, y in K} |u(x) - u(y)|.

``u`` is strictly decreasing, so the maximum is ``u(r) - u(1)`` and the
numerator is ``(u'(r) - u'(1)) / lam``.  Both are evaluated in the boundary
variables ``gap`` and ``delta = 1 - r``:

    u'(r) - u'(1) = 2 k sin(k delta) / (sin(gap) sin(gap + k delta))
    u(r) - u(1)   = 2 log1p(2 cos(gap + k delta / 2) sin(k delta / 2) / sin(gap))

which avoids the cancellation in the direct differences when ``delta`` is
tiny.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInterval, DomainError
from .exact import NearFieldPoint, SingleSpeciesSolution
from .io import csv_text
from .quadrature import integrate_boundary

# intervals thinner than this are rejected
MIN_THICKNESS = 1e-15

CSV_HEADER = ("lambda", "p", "alpha", "exact", "asymptotic", "limit")


@dataclass(frozen=True)
class CapacitanceResult:
    lam: float
    p: float
    alpha: float
    exact: float
    asymptotic: float
    limit: float

    def row(self):
        return (self.lam, self.p, self.alpha, self.exact, self.asymptotic, self.limit)


def g(p):
    """Limit capacitance ``p / (2 (p + 2) log(1 + p/2))`` for ``alpha = 1``."""
    if not p > 0:
        raise DomainError("p must be positive")
    return p / (2.0 * (p + 2.0) * math.log1p(0.5 * p))


def h_coefficient(p):
    """``lam^-2`` correction coefficient of the ``alpha = 1`` expansion."""
    pi2 = math.pi ** 2
    return pi2 * (p * p + 6.0 * p + 12.0) / (6.0 * (p + 2.0)) + p * p * pi2 * (p + 6.0) / (
        24.0 * (p + 2.0) * math.log1p(0.5 * p)
    )


def _numerator(sol, delta):
    k, e = sol.k, sol.gap
    return 2.0 * k * math.sin(k * delta) / (sol.lam * math.sin(e) * math.sin(e + k * delta))


def _denominator(sol, delta):
    k, e = sol.k, sol.gap
    rise = 2.0 * math.cos(e + 0.5 * k * delta) * math.sin(0.5 * k * delta)
    return 2.0 * math.log1p(rise / math.sin(e))


def _check_delta(delta):
    if not (delta > MIN_THICKNESS):
        raise DegenerateInterval(f"interval [1 - {delta!r}, 1] is too thin to resolve")
    if delta > 1.0:
        raise DomainError("interval must lie inside [0, 1]")


def charge_in_layer(sol, delta):
    """``int_{1 - delta}^1 rho / lam`` in closed form."""
    _check_delta(delta)
    return _numerator(sol, delta)


def potential_drop(sol, delta):
    """``u(1 - delta) - u(1)``, positive."""
    _check_delta(delta)
    return _denominator(sol, delta)


def capacitance_of_layer(sol, delta):
    """Capacitance of ``[1 - delta, 1]``."""
    _check_delta(delta)
    return _numerator(sol, delta) / _denominator(sol, delta)


def capacitance_exact(sol, pt):
    """Exact capacitance of ``[r_{p,alpha}, 1]``.

    Raises
    ------
    DegenerateInterval
        If ``1 - r`` is at most ``1e-15``.
    """
    if not math.isclose(pt.lam, sol.lam, rel_tol=1e-15):
        raise DomainError("near-field point and solution use different lambda")
    return capacitance_of_layer(sol, pt.offset)


def capacitance_fixed_r(sol, r):
    """Capacitance of ``[r, 1]`` for a ``lam``-independent ``r`` in [0, 1)."""
    if not (0.0 <= r < 1.0):
        raise DomainError("r must lie in [0, 1)")
    return capacitance_of_layer(sol, 1.0 - r)


def capacitance_limit(p, alpha):
    """Large-lambda limit: 1/2 for ``alpha > 1``, ``g(p)`` at 1 and 0 below."""
    if alpha > 1.0:
        return 0.5
    if alpha == 1.0:
        return g(p)
    return 0.0


def capacitance_asymptotic(lam, p, alpha):
    """Truncated large-lambda expansion of the capacitance of ``[r_{p,alpha}, 1]``."""
    if not (p > 0 and alpha > 0 and lam > 0):
        raise DomainError("lam, p and alpha must be positive")
    if alpha > 1.0:
        chi1 = 1.0 if alpha <= 3.0 else 0.0
        chi2 = 1.0 if alpha >= 3.0 else 0.0
        return 0.5 - p / (8.0 * lam ** (alpha - 1.0)) * chi1 + math.pi ** 2 / (2.0 * lam ** 2) * chi2
    if alpha == 1.0:
        return g(p) * (1.0 + h_coefficient(p) / lam ** 2)
    return 1.0 / ((2.0 - 2.0 * alpha) * math.log(lam))


def numerator_by_quadrature(sol, delta, rtol=1e-10):
    """``int_{1 - delta}^1 rho / lam`` by graded-mesh Simpson (cross-check)."""
    _check_delta(delta)

    def integrand(t):
        s = np.sin(sol.gap + sol.k * t)
        return sol.j / (s * s) / sol.lam

    return integrate_boundary(integrand, 0.0, delta, sol.gap / sol.k, rtol=rtol)


def capacitance_sweep(p, alpha, lambda_grid):
    """:class:`CapacitanceResult` for every ``lam`` in ``lambda_grid``."""
    out = []
    limit = capacitance_limit(p, alpha)
    for lam in lambda_grid:
        sol = SingleSpeciesSolution.from_lambda(lam)
        pt = NearFieldPoint(p, alpha, lam)
        out.append(
            CapacitanceResult(
                lam=float(lam),
                p=float(p),
                alpha=float(alpha),
                exact=capacitance_exact(sol, pt),
                asymptotic=capacitance_asymptotic(lam, p, alpha),
                limit=limit,
            )
        )
    return out


def results_to_csv(results):
    return csv_text(CSV_HEADER, (r.row() for r in results))
