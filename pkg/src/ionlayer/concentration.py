"""Concentration of the charge density and field energy at the wall.

As ``lam`` grows, both ``rho / lam`` and ``u'^2 / (2 lam)`` act on continuous
test functions like a point mass at ``r = 1``.  This module evaluates the two
functionals on a fixed catalog of test functions so reports stay
reproducible.

The first integral ``u'^2 / 2 = J (exp(-u) - 1)`` makes the difference of the
two functionals exact at every ``lam``::

    charge(h) - energy(h) = int_0^1 h / I

which is used as an independent check on the quadrature.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Tuple

import numpy as np

from .errors import DomainError
from .exact import SingleSpeciesSolution
from .io import csv_text
from .quadrature import integrate_boundary

DEFAULT_RTOL = 1e-8
LOCALIZATION_KAPPA = 0.5

CSV_HEADER = ("lambda", "h_id", "charge", "energy", "h_at_1", "gap")


@dataclass(frozen=True)
class TestFunction:
    """Catalog entry: ``eval`` maps ``r`` arrays to values.

    ``breakpoints`` lists interior points where ``h`` has a kink; the
    quadrature splits there.  ``integral``, ``at_one`` and ``slope_at_one``
    are exact reference values.
    """

    __test__ = False  # not a pytest class

    id: str
    eval: Callable[[np.ndarray], np.ndarray]
    integral: float
    at_one: float
    slope_at_one: float
    smooth: bool = True
    breakpoints: Tuple[float, ...] = field(default=())

    def __call__(self, r):
        return self.eval(np.asarray(r, dtype=float))


def _hat(r):
    return np.maximum(0.0, 1.0 - np.abs(r - 0.75) / 0.25)


CATALOG = {
    "one": TestFunction("one", lambda r: np.ones_like(r), 1.0, 1.0, 0.0),
    "r": TestFunction("r", lambda r: r, 0.5, 1.0, 1.0),
    "r2": TestFunction("r2", lambda r: r * r, 1.0 / 3.0, 1.0, 2.0),
    "r3": TestFunction("r3", lambda r: r ** 3, 0.25, 1.0, 3.0),
    "cos": TestFunction("cos", lambda r: np.cos(0.5 * math.pi * r), 2.0 / math.pi, 0.0, -0.5 * math.pi),
    # piecewise-linear hat peaking at 0.75 with support [0.5, 1]
    "hat": TestFunction("hat", _hat, 0.25, 0.0, -4.0, smooth=False, breakpoints=(0.5, 0.75)),
}


def get_test_function(h_id):
    try:
        return CATALOG[h_id]
    except KeyError:
        raise DomainError(f"unknown test function {h_id!r}; choose from {sorted(CATALOG)}") from None


def _resolve(h):
    return get_test_function(h) if isinstance(h, str) else h


def _integrate(sol, h, weight, rtol):
    # integrate weight(t) * h(1 - t) over t in [0, 1], split at kinks
    t0 = sol.gap / sol.k
    cuts = sorted({0.0, 1.0, *(1.0 - b for b in h.breakpoints)})
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        total += integrate_boundary(lambda t: weight(t) * h.eval(1.0 - t), lo, hi, t0, rtol=rtol)
    return total


def charge_functional(sol, h, rtol=DEFAULT_RTOL):
    """``int_0^1 rho h / lam`` by graded Simpson.

    Raises
    ------
    QuadratureStall
        If the refinement budget runs out before the relative change
        drops below ``rtol``.
    """
    h = _resolve(h)

    def weight(t):
        s = np.sin(sol.gap + sol.k * t)
        return sol.j / (s * s) / sol.lam

    return _integrate(sol, h, weight, rtol)


def energy_functional(sol, h, rtol=DEFAULT_RTOL):
    """``int_0^1 u'^2 h / (2 lam)`` by graded Simpson."""
    h = _resolve(h)

    def weight(t):
        c = 1.0 / np.tan(sol.gap + sol.k * t)
        return 2.0 * sol.k ** 2 * c * c / sol.lam

    return _integrate(sol, h, weight, rtol)


def identity_defect(sol, h, rtol=DEFAULT_RTOL):
    """``charge - energy - int h / I``; zero up to quadrature error."""
    h = _resolve(h)
    return charge_functional(sol, h, rtol) - energy_functional(sol, h, rtol) - h.integral / sol.i


def localized_mass(sol, kappa=LOCALIZATION_KAPPA):
    """Mass of ``rho / lam`` on ``[0, 1 - lam^-kappa]``.

    Equals ``-u'(1 - delta) / lam = 2 k cot(gap + k delta) / lam`` with
    ``delta = lam^-kappa``.
    """
    if not (0.0 < kappa < 1.0):
        raise DomainError("kappa must lie in (0, 1)")
    delta = min(1.0, sol.lam ** -kappa)
    return 2.0 * sol.k / math.tan(sol.gap + sol.k * delta) / sol.lam


@dataclass(frozen=True)
class ConcentrationRow:
    lam: float
    h_id: str
    charge: float
    energy: float
    h_at_1: float

    @property
    def gap(self):
        return abs(self.charge - self.h_at_1)

    def row(self):
        return (self.lam, self.h_id, self.charge, self.energy, self.h_at_1, self.gap)


def concentration_sweep(lambda_grid, h_ids=None, rtol=DEFAULT_RTOL):
    """Rows ordered by ``lam`` then catalog order."""
    ids = list(CATALOG) if h_ids is None else list(h_ids)
    funcs = [get_test_function(i) for i in ids]
    out = []
    for lam in lambda_grid:
        sol = SingleSpeciesSolution.from_lambda(lam)
        for h in funcs:
            out.append(
                ConcentrationRow(
                    lam=float(lam),
                    h_id=h.id,
                    charge=charge_functional(sol, h, rtol),
                    energy=energy_functional(sol, h, rtol),
                    h_at_1=h.at_one,
                )
            )
    return out


def results_to_csv(rows):
    return csv_text(CSV_HEADER, (r.row() for r in rows))
