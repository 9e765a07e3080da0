"""Boundary-layer solutions of nonlocal Poisson-Boltzmann equations.

The single-species model has a closed-form solution fixed by a scalar
eigenvalue; :mod:`ionlayer.exact` evaluates it and
:mod:`ionlayer.asymptotics` checks its large-``lam`` expansions.  The
two-species model is solved numerically in :mod:`ionlayer.ccpb`.
"""

from .capacitance import capacitance_asymptotic, capacitance_exact, capacitance_limit, g
from .ccpb import CcpbParams, CcpbSolution, solve_ccpb, w_profile
from .concentration import CATALOG, charge_functional, energy_functional
from .eigenvalue import Eigenvalue, eigenvalue_defect, solve_j
from .errors import (
    BadOrder,
    BlowUp,
    DegenerateInterval,
    DomainError,
    InvalidParams,
    InvariantViolation,
    IonLayerError,
    NoConvergence,
    NonPositiveLambda,
    OutOfBracket,
    QuadratureStall,
)
from .exact import NearFieldPoint, SingleSpeciesSolution, eval_du, eval_rho, eval_u

__version__ = "0.1.0"

__all__ = [
    "BadOrder",
    "BlowUp",
    "CATALOG",
    "CcpbParams",
    "CcpbSolution",
    "DegenerateInterval",
    "DomainError",
    "Eigenvalue",
    "InvalidParams",
    "InvariantViolation",
    "IonLayerError",
    "NearFieldPoint",
    "NoConvergence",
    "NonPositiveLambda",
    "OutOfBracket",
    "QuadratureStall",
    "SingleSpeciesSolution",
    "capacitance_asymptotic",
    "capacitance_exact",
    "capacitance_limit",
    "charge_functional",
    "eigenvalue_defect",
    "energy_functional",
    "eval_du",
    "eval_rho",
    "eval_u",
    "g",
    "solve_ccpb",
    "solve_j",
    "w_profile",
]
