"""Large-lambda expansions of the single-species solution.

All expansions are hard-coded truncations of the standard series.  The
comparison helpers pair each truncation with the exact value from
:mod:`ionlayer.exact` and report residuals normalized by the expected order,
plus an observed convergence order from a least-squares fit across a lambda
sweep.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import BadOrder, DomainError
from .exact import NearFieldPoint, SingleSpeciesSolution, eval_at_offset, eval_du, eval_rho, eval_u
from .io import csv_text, json_text

PI = math.pi
PI2 = PI * PI

# lambda below which the large-lambda series are not meaningful
REGIME_FLOOR = 10.0

DEFAULT_SWEEP = tuple(10.0 ** e for e in np.arange(3.0, 6.01, 0.5))

# lambda^-3 coefficient of J, also written -16 pi^2 + 2 pi^4 / 3
J_CUBIC = -PI2 * (48.0 - 2.0 * PI2) / 3.0


@dataclass(frozen=True)
class LimitProfile:
    """Zeroth-order outer solution ``U(r) = 2 log cos(pi r / 2)``."""

    def u(self, r):
        return 2.0 * np.log(np.cos(0.5 * PI * np.asarray(r, dtype=float)))

    def du(self, r):
        return -PI * np.tan(0.5 * PI * np.asarray(r, dtype=float))


LIMIT = LimitProfile()


@dataclass
class ExpansionReport:
    """Computed-versus-predicted comparison for one expansion at one lambda."""

    name: str
    lam: float
    exact: float
    predicted: float
    residual: float
    normalized_residual: float
    observed_order: float | None = None
    in_regime: bool = True

    def to_dict(self):
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d


def _check_order(order, hi):
    if not (isinstance(order, (int, np.integer)) and 1 <= order <= hi):
        raise BadOrder(f"order must be an integer in 1..{hi}, got {order!r}")


def j_expansion(lam, order=4):
    """Truncation of ``J = pi^2 (1/2 - 2/lam + 6/lam^2 - (48 - 2 pi^2)/(3 lam^3))``."""
    _check_order(order, 4)
    coeffs = (0.5 * PI2, -2.0 * PI2, 6.0 * PI2, J_CUBIC)
    return sum(c / lam ** n for n, c in enumerate(coeffs[:order]))


def i_expansion(lam, order=3):
    """Truncation of ``I = (2/pi^2)(lam + 4 + 4/lam)``."""
    _check_order(order, 3)
    terms = (lam, 4.0, 4.0 / lam)
    return 2.0 / PI2 * sum(terms[:order])


def far_field_u(r, lam, order=3):
    """Far-field truncations ``(u_pred, du_pred)`` for fixed ``r`` in [0, 1).

    Order 1 is the limit profile ``(U, U')``; orders 2 and 3 add the
    ``1/lam`` and ``1/lam^2`` corrections.
    """
    _check_order(order, 3)
    r = float(r)
    if not (0.0 <= r < 1.0):
        raise DomainError(f"far-field expansion needs 0 <= r < 1, got {r!r}")
    h = 0.5 * PI * r
    tan, sec2 = math.tan(h), 1.0 / math.cos(h) ** 2
    sin_pr = math.sin(PI * r)
    u = float(LIMIT.u(r))
    du = float(LIMIT.du(r))
    if order >= 2:
        u += PI * r * sin_pr * sec2 / lam
        du += (2.0 * PI * tan + PI2 * r * sec2) / lam
    if order >= 3:
        u -= PI * r * (PI * r + 2.0 * sin_pr) * sec2 / lam ** 2
        du -= (4.0 * PI * tan + 4.0 * PI2 * r * sec2 + PI ** 3 * r * r * sec2 * tan) / lam ** 2
    return u, du


def near_field_regime(alpha):
    """Label of the near-field case selected by ``alpha`` (exact comparisons)."""
    if alpha > 2.0:
        return "a"
    if alpha == 2.0:
        return "b-2"
    if alpha > 1.0:
        return "b"
    if alpha == 1.0:
        return "c"
    return "d"


def _near_u_terms(p, alpha, lam):
    log_lam = math.log(lam)
    case = near_field_regime(alpha)
    if case == "a":
        return [-2.0 * log_lam, 2.0 * math.log(PI), -4.0 / lam]
    if case == "b-2":
        return [-2.0 * log_lam, 2.0 * math.log(PI), (p - 4.0) / lam]
    if case == "b":
        return [-2.0 * log_lam, 2.0 * math.log(PI), p / lam ** (alpha - 1.0)]
    if case == "c":
        return [-2.0 * log_lam, 2.0 * math.log((p + 2.0) * PI / 2.0), -4.0 / lam]
    lead = -2.0 * alpha * log_lam
    second = 2.0 * math.log(p * PI / 2.0)
    # three-term form 2 log(p pi / (2 lam^a) + correction)
    base = p * PI / (2.0 * lam ** alpha)
    if alpha > 1.0 / 3.0:
        corr = PI / lam
    elif alpha == 1.0 / 3.0:
        corr = (48.0 * PI - p ** 3 * PI ** 3) / (48.0 * lam)
    else:
        corr = -(p ** 3) * PI ** 3 / (48.0 * lam ** (3.0 * alpha))
    third = 2.0 * math.log1p(corr / base)
    return [lead, second, third]


def _near_du_terms(p, alpha, lam):
    case = near_field_regime(alpha)
    if case == "a":
        return [-lam]
    if case in ("b", "b-2"):
        return [-lam, 0.5 * p * lam ** (2.0 - alpha)]
    if case == "c":
        return [-2.0 * lam / (p + 2.0)]
    return [-(2.0 / p) * lam ** alpha]


def near_field_u(pt, order=3):
    """Near-field truncations ``(u_pred, du_pred)`` at ``r = 1 - p lam^-alpha``.

    The potential carries up to three terms in every regime.  The slope
    carries the terms that are known in closed form: the leading ``-lam`` for
    ``alpha > 2``, two terms for ``1 < alpha <= 2`` and one term otherwise;
    higher ``order`` requests reuse everything available.
    """
    _check_order(order, 3)
    if not isinstance(pt, NearFieldPoint):
        raise DomainError("near_field_u expects a NearFieldPoint")
    u_terms = _near_u_terms(pt.p, pt.alpha, pt.lam)
    du_terms = _near_du_terms(pt.p, pt.alpha, pt.lam)
    return sum(u_terms[:order]), sum(du_terms[:order])


def near_field_rho(pt):
    """Leading-order charge density at a near-field point."""
    lam, p, alpha = pt.lam, pt.p, pt.alpha
    if alpha > 1.0:
        return 0.5 * lam * lam
    if alpha == 1.0:
        return 2.0 * lam * lam / (p + 2.0) ** 2
    return 2.0 * lam ** (2.0 * alpha) / (p * p)


def far_field_rho(r, lam, order=2, literal=False):
    """Far-field charge density to first order in ``1/lam``.

    The correction is ``-(2 pi^2 sec^2 + pi^3 r sec^2 tan) / lam`` (argument
    ``pi r / 2``), which is ``-d/dr`` of the slope correction in
    :func:`far_field_u` and agrees with the exact solution.  ``literal=True``
    drops the factor ``r`` from the second term, reproducing the commonly
    quoted form, which does not match the exact solution for ``r < 1``.
    """
    _check_order(order, 2)
    r = float(r)
    if not (0.0 <= r < 1.0):
        raise DomainError(f"far-field expansion needs 0 <= r < 1, got {r!r}")
    h = 0.5 * PI * r
    sec2, tan = 1.0 / math.cos(h) ** 2, math.tan(h)
    out = 0.5 * PI2 * sec2
    if order >= 2:
        weight = 1.0 if literal else r
        out -= (2.0 * PI2 * sec2 + PI ** 3 * weight * sec2 * tan) / lam
    return out


def potential_gap_limits(p, p2=None, alpha=1.0):
    """Large-lambda limits of near-field potential differences.

    With ``p2`` omitted returns ``lim |u(r_{p,alpha}) - u(1)|`` (``math.inf``
    for ``alpha < 1``); otherwise ``lim |u(r_{p,alpha}) - u(r_{p2,alpha})|``.
    """
    if not (p > 0 and alpha > 0 and (p2 is None or p2 > 0)):
        raise DomainError("p, p2 and alpha must be positive")
    if p2 is None:
        if alpha < 1.0:
            return math.inf
        if alpha == 1.0:
            return 2.0 * math.log((p + 2.0) / 2.0)
        return 0.0
    if alpha < 1.0:
        return 2.0 * abs(math.log(p / p2))
    if alpha == 1.0:
        return 2.0 * abs(math.log((p + 2.0) / (p2 + 2.0)))
    return 0.0


def j_residual(sol, order=3):
    """``J - j_expansion(lam, order)`` formed without cancelling ``pi^2/2``.

    Uses ``pi^2/2 - J = 2 gap (pi - gap)``, so the residual keeps full
    relative precision even when it is far below ``ulp(J)``.
    """
    _check_order(order, 4)
    deficit = 2.0 * sol.gap * (PI - sol.gap)
    coeffs = (-2.0 * PI2, 6.0 * PI2, J_CUBIC)
    tail = sum(c / sol.lam ** (n + 1) for n, c in enumerate(coeffs[: order - 1]))
    return -deficit - tail


def observed_order(lams, residuals):
    """Least-squares slope ``-d log|residual| / d log lam``; needs >= 3 points."""
    lams = np.asarray(lams, dtype=float)
    res = np.abs(np.asarray(residuals, dtype=float))
    keep = res > 0
    if keep.sum() < 3:
        return None
    slope = np.polyfit(np.log(lams[keep]), np.log(res[keep]), 1)[0]
    return float(-slope)


# --- comparison harness -----------------------------------------------------


def _pair_j(sol, order):
    return sol.j, j_expansion(sol.lam, order), order, j_residual(sol, order)


def _pair_i(sol, order):
    # I grows like lam, so the remainder after `order` terms is O(lam^(1 - order))
    return sol.i, i_expansion(sol.lam, order), order - 1


def _pair_u1(sol, order):
    lam = sol.lam
    terms = [-2.0 * math.log(lam), 2.0 * math.log(PI), -4.0 / lam]
    # exponent of the first omitted term: log, 1, 1/lam, 1/lam^2
    return eval_at_offset(sol, 0.0)[0], sum(terms[:order]), (0, 1, 2)[order - 1]


def _make_far(r, which):
    def pair(sol, order):
        u_pred, du_pred = far_field_u(r, sol.lam, order)
        if which == "u":
            return eval_u(sol, r), u_pred, order
        return eval_du(sol, r), du_pred, order

    return pair


def _make_far_rho(r):
    def pair(sol, order):
        return eval_rho(sol, r), far_field_rho(r, sol.lam, order), order

    return pair


EXPANSIONS = {
    "j": (_pair_j, 4),
    "i": (_pair_i, 3),
    "u1": (_pair_u1, 3),
    "far_u_0.5": (_make_far(0.5, "u"), 3),
    "far_du_0.5": (_make_far(0.5, "du"), 3),
    "far_u_0.9": (_make_far(0.9, "u"), 3),
    "far_du_0.9": (_make_far(0.9, "du"), 3),
    "far_rho_0.3": (_make_far_rho(0.3), 2),
}


def compare(name, lam, order=None, sol=None):
    """Build one :class:`ExpansionReport` for a named expansion.

    ``normalized_residual`` is ``residual * lam**m`` where ``m`` is the
    exponent of the first omitted power of ``1/lam``.  For ``"j"`` the
    residual comes from :func:`j_residual`.
    """
    try:
        pair, max_order = EXPANSIONS[name]
    except KeyError:
        raise KeyError(f"unknown expansion {name!r}; choose from {sorted(EXPANSIONS)}") from None
    order = max_order if order is None else order
    _check_order(order, max_order)
    sol = sol or SingleSpeciesSolution.from_lambda(lam)
    exact, predicted, next_power, *accurate = pair(sol, order)
    # J supplies a cancellation-free residual; it equals exact - predicted to within ulp(J)
    residual = accurate[0] if accurate else exact - predicted
    return ExpansionReport(
        name=name,
        lam=float(lam),
        exact=float(exact),
        predicted=float(predicted),
        residual=float(residual),
        normalized_residual=float(residual * lam ** next_power),
        in_regime=lam >= REGIME_FLOOR,
    )


def sweep(name, lams=DEFAULT_SWEEP, order=None):
    """Reports for ``name`` across ``lams`` with a shared observed order."""
    reports = [compare(name, lam, order) for lam in lams]
    rate = observed_order([r.lam for r in reports], [r.residual for r in reports])
    for rep in reports:
        rep.observed_order = rate
    return reports


def near_field_report(p, alpha, lam, order=3, sol=None):
    """Exact-versus-predicted potential and slope at a near-field point."""
    sol = sol or SingleSpeciesSolution.from_lambda(lam)
    pt = NearFieldPoint(p, alpha, lam)
    u, du, _ = eval_at_offset(sol, pt.offset)
    u_pred, du_pred = near_field_u(pt, order)
    return {"u": u, "u_pred": u_pred, "du": du, "du_pred": du_pred}


REPORT_FIELDS = (
    "name",
    "lambda",
    "exact",
    "predicted",
    "residual",
    "normalized_residual",
    "observed_order",
    "in_regime",
)


def reports_to_csv(reports):
    """One CSV row per (expansion, lambda)."""
    rows = ([rep.to_dict()[f] for f in REPORT_FIELDS] for rep in reports)
    return csv_text(REPORT_FIELDS, rows)


def reports_to_json(reports):
    return json_text([rep.to_dict() for rep in reports])
