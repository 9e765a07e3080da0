"""Invariant suites for every module, aggregated into one report.

Each suite is a function of a lambda grid returning a list of
:class:`Check` records.  A check that raises counts as a failure with the
exception text as its detail, so one broken invariant never hides the
others.  The report is plain data (no timings) so that two runs with the
same inputs serialize to identical bytes.
"""

import logging
import math
import time
from dataclasses import dataclass

import numpy as np

from . import asymptotics as asym
from . import capacitance as cap
from . import ccpb
from . import concentration as conc
from .eigenvalue import J_MAX, eigenvalue_defect, solve_j
from .errors import IonLayerError
from .exact import (
    NearFieldPoint,
    SingleSpeciesSolution,
    eval_at_offset,
    eval_du,
    eval_rho,
    eval_u,
    exp_neg_u_integral,
    first_integral_defect,
)
from .quadrature import graded_mesh

log = logging.getLogger(__name__)

DEFAULT_LAMBDA_GRID = (1e3, 1e4, 1e5, 1e6)
SEED = 20240601


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""

    def to_dict(self):
        return {"name": self.name, "passed": bool(self.passed), "detail": self.detail}


def _run(name, fn):
    """Evaluate ``fn() -> (passed, detail)``; exceptions become failures."""
    try:
        passed, detail = fn()
    except (IonLayerError, ArithmeticError, ValueError) as exc:
        return Check(name, False, f"{type(exc).__name__}: {exc}")
    return Check(name, bool(passed), detail)


def _sols(lambda_grid):
    return [SingleSpeciesSolution.from_lambda(lam) for lam in lambda_grid]


# --- eigenvalue ---------------------------------------------------------------


def _sign_changes(lam, n=400):
    # grid in x = sqrt(J/2): uniform on (0, pi/2) plus a log-graded cluster at pi/2
    half = 0.5 * math.pi
    x = np.concatenate([np.linspace(0.0, half, n + 2)[1:-1], half - np.logspace(-13, -1, n)])
    x = np.unique(x[(x > 0) & (x < half)])
    vals = np.array([eigenvalue_defect(lam, 2.0 * xi * xi) for xi in x if 2.0 * xi * xi < J_MAX])
    vals = vals[vals != 0.0]
    return int(np.sum(np.sign(vals[1:]) != np.sign(vals[:-1])))


def suite_eigenvalue(lambda_grid, n_random=200):
    rng = np.random.default_rng(SEED)
    rand = 10.0 ** rng.uniform(-3.0, 6.0, n_random)
    checks = []

    def bracketing():
        bad = [lam for lam in rand if _sign_changes(lam, 150) != 1]
        return not bad, f"{n_random} random lambda, {len(bad)} without a single sign change"

    def monotone():
        lams = np.sort(np.concatenate([rand, lambda_grid]))
        js = np.array([solve_j(lam).j for lam in lams])
        return bool(np.all(np.diff(js) > 0)), f"{len(lams)} sorted lambda"

    def limit():
        defs = [2.0 * e.gap * (math.pi - e.gap) for e in (solve_j(10.0 ** k) for k in range(1, 7))]
        return bool(np.all(np.diff(defs) < 0)), "pi^2/2 - J along 10..1e6: " + ", ".join(
            f"{d:.3e}" for d in defs
        )

    def redundancy():
        worst = max(abs(solve_j(lam).i * solve_j(lam).j / lam - 1.0) for lam in np.concatenate([rand, lambda_grid]))
        return worst <= 8 * np.finfo(float).eps, f"max |I J / lam - 1| = {worst:.2e}"

    for name, fn in [
        ("single sign change", bracketing),
        ("J increasing in lambda", monotone),
        ("J deficit decreasing", limit),
        ("I J = lambda", redundancy),
    ]:
        checks.append(_run(name, fn))
    return checks


# --- exact solution -------------------------------------------------------------


def suite_exact(lambda_grid):
    sols = _sols(lambda_grid)
    checks = []

    def monotone():
        for s in sols:
            r = graded_mesh(1.0 / s.lam, 2000)
            u, du, rho = eval_u(s, r), eval_du(s, r), eval_rho(s, r)
            if not (np.all(np.diff(u) < 0) and np.all(np.diff(du) < 0) and np.all(np.diff(rho) > 0)):
                return False, f"monotonicity fails at lambda = {s.lam:g}"
        return True, "u, u' decreasing and rho increasing on graded grids"

    def derivative():
        worst = 0.0
        for s in sols:
            for r in (0.1, 0.3, 0.5, 0.7, 0.9):
                h = 1e-6
                fd = (eval_u(s, r + h) - eval_u(s, r - h)) / (2.0 * h)
                worst = max(worst, abs(fd / eval_du(s, r) - 1.0))
            # inside the layer step in the offset t = 1 - r, where r +- h would round
            t, h = 5.0 / s.lam, 1e-6 / s.lam
            fd = (eval_at_offset(s, t - h)[0] - eval_at_offset(s, t + h)[0]) / (2.0 * h)
            worst = max(worst, abs(fd / eval_at_offset(s, t)[1] - 1.0))
        return worst <= 1e-6, f"max relative error {worst:.2e}"

    def quadrature():
        worst = max(abs(exp_neg_u_integral(s) / s.i - 1.0) for s in sols)
        return worst <= 1e-8, f"max relative error {worst:.2e}"

    def first_integral():
        worst = 0.0
        for s in sols:
            r = graded_mesh(1.0 / s.lam, 2000)
            worst = max(worst, float(np.max(np.abs(first_integral_defect(s, r)))) / (1.0 + s.lam ** 2))
        return worst <= 1e-10, f"max defect / (1 + lam^2) = {worst:.2e}"

    for name, fn in [
        ("monotone and concave", monotone),
        ("finite differences match u'", derivative),
        ("Simpson integral of exp(-u) equals I", quadrature),
        ("first integral", first_integral),
    ]:
        checks.append(_run(name, fn))
    return checks


# --- asymptotics ------------------------------------------------------------------


def _resolved(rep):
    # residuals below a few ulps of the exact value carry no information
    return abs(rep.residual) > 1e-13 * (1.0 + abs(rep.exact))


def suite_asymptotics(lambda_grid):
    lams = [lam for lam in lambda_grid if lam >= 1e3] or [1e3, 1e4]
    checks = []

    def j_coefficient():
        reps = [asym.compare("j", lam, order=3) for lam in lams]
        worst = max(abs(r.normalized_residual / asym.J_CUBIC - 1.0) for r in reps)
        return worst <= 0.25, f"lam^3 (J - 3 terms) within {100 * worst:.1f}% of {asym.J_CUBIC:.2f}"

    def bounded():
        notes = []
        ok = True
        for name in asym.EXPANSIONS:
            reps = [r for r in (asym.compare(name, lam) for lam in lams) if _resolved(r)]
            if len(reps) < 2:
                continue
            vals = np.abs([r.normalized_residual for r in reps])
            spread = float(vals.max() / vals.min())
            ok &= bool(np.all(np.isfinite(vals))) and spread <= 2.0
            notes.append(f"{name}: spread {spread:.3f}")
        return ok, "; ".join(notes)

    def sandwich():
        for lam in lams:
            e = solve_j(lam)
            c2 = (2.0 * math.pi ** 2 / lam - 2.0 * e.gap * (math.pi - e.gap)) * lam ** 2 / math.pi ** 2
            if not (5.5 < c2 < 6.0):
                return False, f"lam^2 coefficient {c2!r} at lambda = {lam:g}"
        return True, "5.5 < lam^2 (J - pi^2(1/2 - 2/lam)) / pi^2 < 6"

    def continuity():
        lam = lams[-1]
        a = asym._near_u_terms(1.0, 1.0 + 1e-9, lam)[0] / math.log(1.0 / lam)
        b = asym._near_u_terms(1.0, 1.0, lam)[0] / math.log(1.0 / lam)
        return math.isclose(a, b, rel_tol=1e-8) and math.isclose(b, 2.0), f"leading coefficients {a!r}, {b!r}"

    def limit_profile():
        r = np.linspace(0.0, 0.95, 40)
        ok = all(
            asym.far_field_u(x, lam, 1) == (asym.LIMIT.u(x), asym.LIMIT.du(x)) for x in r for lam in lams
        )
        return ok, "one-term far field equals the limit profile"

    for name, fn in [
        ("J cubic coefficient", j_coefficient),
        ("normalized residuals bounded", bounded),
        ("J sandwich with eps = 0.5", sandwich),
        ("near-field continuity at alpha = 1", continuity),
        ("limit profile", limit_profile),
    ]:
        checks.append(_run(name, fn))
    return checks


# --- ccpb -------------------------------------------------------------------------


def random_ccpb_points(n=20, seed=SEED):
    """``(lam, mu)`` with ``lam`` log-uniform on [10, 1e4] and ``mu / lam`` on [1e-4, 0.9]."""
    rng = np.random.default_rng(seed)
    lam = 10.0 ** rng.uniform(1.0, 4.0, n)
    ratio = 10.0 ** rng.uniform(-4.0, math.log10(0.9), n)
    return [(float(a), float(a * q)) for a, q in zip(lam, ratio)]


def ccpb_point_checks(sol):
    """Run every per-solution invariant; returns a failure message or ``None``."""
    lam, mu = sol.lam, sol.mu
    ccpb.check_solution(sol)
    ccpb.w_profile(sol)
    fi = float(np.max(np.abs(ccpb.first_integral_defect(sol))))
    if fi > 1e-6 * lam ** 2:
        return f"first integral defect {fi:.2e}"
    if abs(sol.dv[-1] - (mu - lam)) > 1e-6 * lam:
        return "boundary slope"
    if mu > 0:
        ab = sol.a * sol.b
        if not (1.0 - 1e-12 <= ab <= lam / mu * (1.0 + 1e-12)):
            return f"a b = {ab!r} outside [1, lam/mu]"
        lo, hi = ccpb.squeeze_interval(sol)
        if not (lo * (1.0 - 1e-12) < lam / sol.b < hi * (1.0 + 1e-12)):
            return f"lam / b = {lam / sol.b!r} outside ({lo!r}, {hi!r})"
    return None


def suite_ccpb(lambda_grid, n_random=20):
    checks = []

    def oracle():
        worst_v = worst_b = 0.0
        for lam in (10.0, 100.0, 1e3, 1e4):
            sol = ccpb.solve_ccpb(ccpb.CcpbParams(lam=lam))
            exact = SingleSpeciesSolution.from_lambda(lam)
            worst_v = max(worst_v, float(np.max(np.abs(sol.v - eval_u(exact, sol.nodes)))))
            worst_b = max(worst_b, abs(sol.b / exact.i - 1.0))
        return worst_v <= 1e-6 and worst_b <= 1e-6, f"sup |v - u| = {worst_v:.2e}, |b/I - 1| = {worst_b:.2e}"

    def random_points():
        for lam, mu in random_ccpb_points(n_random):
            sol = ccpb.solve_ccpb(ccpb.CcpbParams(lam=lam, mu=mu))
            msg = ccpb_point_checks(sol)
            if msg:
                return False, f"lam = {lam:g}, mu = {mu:g}: {msg}"
        return True, f"{n_random} random (lambda, mu) points"

    def refinement():
        p = ccpb.CcpbParams(lam=1e4, mu=10.0, grid_size=2000)
        a = ccpb.solve_ccpb(p)
        b = ccpb.solve_ccpb(ccpb.replace(p, grid_size=4000))
        diff = abs(float(np.max(np.abs(a.v))) - float(np.max(np.abs(b.v))))
        return diff <= 10.0 * p.ode_tol, f"sup |v| changes by {diff:.2e}"

    def figure1():
        mus = (1e4, 1e3, 1e2, 10.0, 0.0)
        sols = [ccpb.solve_ccpb(ccpb.CcpbParams(lam=1e4, mu=m)) for m in mus]
        ordered = all(np.all(hi.v >= lo.v) for hi, lo in zip(sols[:-1], sols[1:]))
        dists = [ccpb.c1_distance(s) for s in sols]
        decreasing = all(b < a for a, b in zip(dists[:-1], dists[1:]))
        neutral = float(np.max(np.abs(sols[0].v))) <= 1e-12
        return ordered and decreasing and neutral, "C1 distances " + ", ".join(f"{d:.4g}" for d in dists)

    def small_mu_convergence():
        rows = ccpb.convergence_study([1e2, 1e3, 1e4], lambda lam: (lam ** -2,))
        c1 = [r["c1"] for r in rows]
        bound_ok = all(math.exp(r["w1"]) <= r["bound"] * (1.0 + 1e-12) for r in rows)
        return all(b < a for a, b in zip(c1[:-1], c1[1:])) and bound_ok, "C1 " + ", ".join(f"{c:.2e}" for c in c1)

    def fixed_lambda():
        rows = ccpb.convergence_study([1e4], ccpb.fixed_lambda_rule([10.0 ** -k for k in range(1, 7)]))
        sup_w = [r["sup_w"] for r in rows]
        return all(b < a for a, b in zip(sup_w[:-1], sup_w[1:])), "sup w " + ", ".join(f"{s:.2e}" for s in sup_w)

    def proportional():
        rows = ccpb.convergence_study([1e2, 1e3, 1e4], lambda lam: (0.5 * lam,))
        c1 = [r["c1"] for r in rows]
        return min(c1) > 1.0, "C1 for mu = lam / 2: " + ", ".join(f"{c:.3g}" for c in c1)

    for name, fn in [
        ("mu = 0 reproduces the closed form", oracle),
        ("invariants at random points", random_points),
        ("mesh refinement", refinement),
        ("figure 1 ordering", figure1),
        ("C1 convergence for mu = lam^-2", small_mu_convergence),
        ("sup w decreasing as mu -> 0", fixed_lambda),
        ("no convergence for mu = lam / 2", proportional),
    ]:
        checks.append(_run(name, fn))
    return checks


# --- capacitance ---------------------------------------------------------------------

CAPACITANCE_CASES = ((1.0, 0.5), (2.0, 1.0), (1.0, 1.5), (1.0, 2.0), (1.0, 3.0), (1.0, 4.0))


def suite_capacitance(lambda_grid):
    sols = _sols(lambda_grid)
    checks = []

    def agreement():
        worst = 0.0
        n = 0
        for s in sols:
            for p, alpha in CAPACITANCE_CASES:
                delta = NearFieldPoint(p, alpha, s.lam).offset
                if delta <= cap.MIN_THICKNESS:
                    continue
                q = cap.numerator_by_quadrature(s, delta)
                worst = max(worst, abs(cap.charge_in_layer(s, delta) / q - 1.0))
                n += 1
        return worst <= 1e-8, f"{n} points, max relative difference {worst:.2e}"

    def sign_of_gap():
        for s in sols:
            for p, alpha in CAPACITANCE_CASES:
                if alpha <= 1.0 or NearFieldPoint(p, alpha, s.lam).offset <= cap.MIN_THICKNESS:
                    continue
                exact = cap.capacitance_exact(s, NearFieldPoint(p, alpha, s.lam))
                pred = cap.capacitance_asymptotic(s.lam, p, alpha)
                # the excess over 1/2 may not exceed twice the predicted correction
                if exact - 0.5 > 2.0 * abs(pred - 0.5) or np.sign(exact - 0.5) != np.sign(pred - 0.5):
                    return False, f"p = {p}, alpha = {alpha}, lambda = {s.lam:g}: {exact!r}"
        return True, "exact - 1/2 has the sign of the leading correction"

    def g_shape():
        p = np.linspace(0.01, 100.0, 2000)
        vals = np.array([cap.g(x) for x in p])
        return bool(np.all(np.diff(vals) < 0) and vals.max() < 0.5), f"g decreasing, max {vals.max():.6f}"

    for name, fn in [
        ("closed-form charge equals quadrature", agreement),
        ("approach to 1/2 for alpha > 1", sign_of_gap),
        ("g decreasing and below 1/2", g_shape),
    ]:
        checks.append(_run(name, fn))
    return checks


# --- concentration ----------------------------------------------------------------------


def suite_concentration(lambda_grid):
    sols = _sols(lambda_grid)
    checks = []

    def identity():
        worst = max(abs(conc.identity_defect(s, h)) for s in sols for h in conc.CATALOG.values())
        return worst <= 1e-8, f"max |charge - energy - int h / I| = {worst:.2e}"

    def convergence():
        path = _sols([1e2, 1e3, 1e4, 1e5])
        notes = []
        for h in conc.CATALOG.values():
            gaps = [abs(conc.charge_functional(s, h) - h.at_one) for s in path]
            if h.id == "one":
                if max(gaps) > 1e-8:
                    return False, f"charge of h = 1 differs from 1 by {max(gaps):.2e}"
                continue
            if not all(b < a for a, b in zip(gaps[:-1], gaps[1:])):
                return False, f"gap not decreasing for {h.id}"
            if h.slope_at_one != 0.0:
                rate = [g * s.lam / math.log(s.lam) for g, s in zip(gaps, path)]
                if max(rate) / min(rate) > 2.0:
                    return False, f"rate for {h.id} is not log(lam)/lam: {rate}"
                notes.append(h.id)
        return True, "gaps decrease like log(lam)/lam for " + ", ".join(notes)

    def localization():
        mass = [conc.localized_mass(s) for s in sols]
        scaled = [m * s.lam ** (1.0 - conc.LOCALIZATION_KAPPA) for m, s in zip(mass, sols)]
        ok = all(b < a for a, b in zip(mass[:-1], mass[1:])) and all(1.0 < x < 3.0 for x in scaled)
        return ok, "mass " + ", ".join(f"{m:.3e}" for m in mass)

    for name, fn in [
        ("charge - energy identity", identity),
        ("convergence to h(1)", convergence),
        ("localization", localization),
    ]:
        checks.append(_run(name, fn))
    return checks


SUITES = {
    "eigenvalue": suite_eigenvalue,
    "exact": suite_exact,
    "asymptotics": suite_asymptotics,
    "ccpb": suite_ccpb,
    "capacitance": suite_capacitance,
    "concentration": suite_concentration,
}


def run_verify(suite="all", lambda_grid=DEFAULT_LAMBDA_GRID):
    """Run one suite or ``"all"``; returns a JSON-ready report.

    ``report["passed"]`` is the conjunction of every check.
    """
    names = list(SUITES) if suite == "all" else [suite]
    for name in names:
        if name not in SUITES:
            raise ValueError(f"unknown suite {name!r}; choose from {['all', *SUITES]}")
    grid = tuple(float(x) for x in lambda_grid)
    report = {"lambda_grid": list(grid), "suites": {}}
    for name in names:
        start = time.perf_counter()
        checks = SUITES[name](grid)
        log.info("suite %s: %d checks in %.1f s", name, len(checks), time.perf_counter() - start)
        report["suites"][name] = {
            "passed": all(c.passed for c in checks),
            "checks": [c.to_dict() for c in checks],
        }
    report["passed"] = all(s["passed"] for s in report["suites"].values())
    return report
