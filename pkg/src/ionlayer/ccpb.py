"""Charge-conserving Poisson-Boltzmann equation with two ion species.

Solves

    v'' = mu e^v / int_0^1 e^v  -  lam e^-v / int_0^1 e^-v,   v(0) = v'(0) = 0

for ``lam > mu >= 0``.  With the two integrals frozen the problem is an
initial value problem (:func:`integrate_ivp`); the nonlocal part becomes a
pair of scalar consistency conditions on the frozen coefficients

    ca = mu / int e^v,    cb = lam / int e^-v.

Three methods are available.

``"newton"`` (default)
    All-at-once Newton on the RK4 interval maps of a fixed graded grid
    (multiple shooting with one segment per grid interval).  The running
    integrals and both log-coefficients are carried as node states, so the
    consistency conditions become boundary conditions at ``r = 1`` and the
    linear systems are banded.  ``mu`` is reached by continuation from the
    one-species profile.  This stays well conditioned when the bulk of the
    profile sits on the saddle ``ca e^v = cb e^-v``, where perturbations grow
    like ``exp(sqrt(ca + cb) r)``.
``"bracketed"``
    Single shooting with :func:`integrate_ivp` and nested monotone root
    finding: for fixed ``ca`` the map ``cb -> cb int e^-v`` is increasing, and
    after that inner solve ``ca -> ca int e^v`` is increasing as well.  Exact
    enough for ``mu = 0`` and small ``mu``; beyond that the saddle growth
    exceeds double precision and the sweep blows up.
``"picard"``
    Damped fixed-point iteration on ``(int e^v, int e^-v)`` with a Broyden
    tail.  Kept for comparison; its linearised multiplier grows with ``lam``
    and it only converges for small ``lam``.
"""

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import brentq

from ._kernels import rk4_interval_maps, rk4_sweep
from .errors import BlowUp, InvalidParams, InvariantViolation, NoConvergence
from .exact import SingleSpeciesSolution, eval_du, eval_u
from .io import columns_csv_text, json_text
from .quadrature import graded_mesh

log = logging.getLogger(__name__)

METHODS = ("newton", "bracketed", "picard")

# Newton on the interval maps: iteration cap per continuation step and the
# scaled residual at which an iterate is accepted
NEWTON_MAX_ITERS = 40
NEWTON_RES_TOL = 1e-13
MAX_CONTINUATION_STEPS = 200

# largest substep count tried before giving up on the requested ode_tol
MAX_SUBSTEPS = 256
# |G(cb)| substituted when the frozen problem blows up before r = 1; the sign
# follows the escape direction (down means int e^-v is effectively infinite)
BLOWUP_SENTINEL = 50.0


@dataclass(frozen=True)
class CcpbParams:
    """Inputs of a two-species solve.

    ``grid_size`` counts intervals, so the grid has ``grid_size + 1`` nodes.
    ``damping`` is only used by the Picard method.
    """

    lam: float
    mu: float = 0.0
    grid_size: int = 4000
    damping: float = 0.5
    outer_tol: float = 1e-10
    ode_tol: float = 1e-10
    max_outer_iters: int = 500
    method: str = "newton"

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise InvalidParams(f"lambda must be positive, got {self.lam!r}")
        if not (math.isfinite(self.mu) and self.mu >= 0):
            raise InvalidParams(f"mu must be nonnegative, got {self.mu!r}")
        if self.mu > self.lam:
            raise InvalidParams(f"need lambda >= mu, got lambda={self.lam!r}, mu={self.mu!r}")
        if not (isinstance(self.grid_size, (int, np.integer)) and self.grid_size >= 64):
            raise InvalidParams(f"grid_size must be an integer >= 64, got {self.grid_size!r}")
        if not (0.0 < self.damping <= 1.0):
            raise InvalidParams(f"damping must lie in (0, 1], got {self.damping!r}")
        if not (self.outer_tol > 0 and self.ode_tol > 0):
            raise InvalidParams("tolerances must be positive")
        if not (isinstance(self.max_outer_iters, (int, np.integer)) and self.max_outer_iters >= 1):
            raise InvalidParams("max_outer_iters must be a positive integer")
        if self.method not in METHODS:
            raise InvalidParams(f"method must be one of {METHODS}, got {self.method!r}")


@dataclass(frozen=True)
class IvpSolution:
    """Node values of the frozen-coefficient initial value problem."""

    nodes: np.ndarray
    v: np.ndarray
    dv: np.ndarray
    int_exp_v: float
    int_exp_neg_v: float
    substeps: int


@dataclass(frozen=True)
class CcpbSolution:
    """Converged two-species profile.

    Attributes
    ----------
    a, b : float
        ``int_0^1 e^v`` and ``int_0^1 e^-v``.
    coef_a, coef_b : float
        Frozen coefficients ``mu / a`` and ``lam / b``.
    residual : float
        ``max(|coef_a a / mu - 1|, |coef_b b / lam - 1|)`` at return.
    outer_iters : int
        Newton iterations summed over the continuation, Picard steps, or
        outer root-finder evaluations, depending on the method.
    ivp_calls : int
        Number of full-grid RK4 sweeps performed.
    """

    params: CcpbParams
    nodes: np.ndarray
    v: np.ndarray
    dv: np.ndarray
    a: float
    b: float
    coef_a: float
    coef_b: float
    outer_iters: int
    converged: bool
    residual: float = 0.0
    ivp_calls: int = 0
    substeps: int = 1

    @property
    def lam(self):
        return self.params.lam

    @property
    def mu(self):
        return self.params.mu


@dataclass(frozen=True)
class WProfile:
    """Difference ``w = v - u`` between the two-species and one-species profiles."""

    nodes: np.ndarray
    w: np.ndarray
    dw: np.ndarray
    bound: float = field(default=math.inf)

    @property
    def w1(self):
        return float(self.w[-1])


def default_nodes(lam, grid_size):
    """Grid graded toward ``r = 1`` on the layer scale ``1 / lam``."""
    return graded_mesh(1.0 / max(lam, 1.0), grid_size)


def blowup_bound(lam):
    """``|v|`` beyond which a frozen-coefficient sweep is declared divergent."""
    if lam is None:
        return 600.0
    return min(600.0, 100.0 * max(1.0, math.log(lam)))


def _sweep(coef_a, coef_b, nodes, m, vmax):
    v, dv, ia, ib, fail = rk4_sweep(float(coef_a), float(coef_b), nodes, int(m), float(vmax))
    if fail >= 0:
        v_esc, p_esc = v[fail], dv[fail]
        # an infinite state still carries a usable sign
        if not math.isnan(v_esc) and v_esc != 0.0:
            direction = 1 if v_esc > 0 else -1
        elif not math.isnan(p_esc) and p_esc != 0.0:
            direction = 1 if p_esc > 0 else -1
        else:
            direction = 0
        raise BlowUp(
            f"|v| exceeded {vmax:.3g} before r = {nodes[fail]:.17g} "
            f"(coef_a={float(coef_a):.6g}, coef_b={float(coef_b):.6g})",
            direction=direction,
        )
    return v, dv, ia, ib


def choose_substeps(coef_a, coef_b, nodes, ode_tol, lam=None, start=1):
    """Smallest power-of-two substep count whose halving changes ``v`` by ``<= ode_tol``.

    The change is measured relative to ``1 + |v|`` at every node.
    """
    vmax = blowup_bound(lam)
    m = start
    v_prev = _sweep(coef_a, coef_b, nodes, m, vmax)[0]
    while m < MAX_SUBSTEPS:
        v_next = _sweep(coef_a, coef_b, nodes, 2 * m, vmax)[0]
        if np.max(np.abs(v_next - v_prev) / (1.0 + np.abs(v_next))) <= ode_tol:
            return m
        m *= 2
        v_prev = v_next
    log.warning("substep halving stopped at %d without reaching ode_tol=%.1e", m, ode_tol)
    return m


def integrate_ivp(coef_a, coef_b, nodes, ode_tol=1e-10, substeps=None, lam=None):
    """Solve ``v'' = coef_a e^v - coef_b e^-v``, ``v(0) = v'(0) = 0`` on ``nodes``.

    Parameters
    ----------
    coef_a, coef_b : float
        Frozen coefficients, ``coef_a >= 0`` and ``coef_b > 0``.
    nodes : array_like
        Increasing grid starting at 0.
    ode_tol : float
        Target for the substep-halving test; ignored when ``substeps`` is given.
    substeps : int, optional
        Fixed number of RK4 substeps per node interval.
    lam : float, optional
        Sets the blow-up threshold ``100 max(1, log lam)`` (capped at 600).

    Returns
    -------
    IvpSolution

    Raises
    ------
    BlowUp
        If ``|v|`` exceeds the threshold or the state overflows.
    """
    if not (coef_a >= 0 and coef_b > 0):
        raise InvalidParams("need coef_a >= 0 and coef_b > 0")
    nodes = np.ascontiguousarray(nodes, dtype=float)
    if nodes[0] != 0.0 or np.any(np.diff(nodes) <= 0):
        raise InvalidParams("nodes must start at 0 and increase strictly")
    if substeps is None:
        substeps = choose_substeps(coef_a, coef_b, nodes, ode_tol, lam)
    v, dv, ia, ib = _sweep(coef_a, coef_b, nodes, substeps, blowup_bound(lam))
    return IvpSolution(nodes, v, dv, float(ia[-1]), float(ib[-1]), int(substeps))


def _exp_u_integral(sol):
    # int_0^1 cos^2(k r) dr
    k = sol.k
    return 0.5 + math.sin(2.0 * k) / (4.0 * k)


class _Counter:
    def __init__(self):
        self.calls = 0


def _residuals(params, coef_a, coef_b, ivp):
    rb = coef_b * ivp.int_exp_neg_v / params.lam - 1.0
    ra = coef_a * ivp.int_exp_v / params.mu - 1.0 if params.mu > 0 else 0.0
    return ra, rb


class _Hit(Exception):
    """Raised from inside a root-finder objective once the tolerance is met."""

    def __init__(self, x):
        self.x = x


def _solve_bracketed(params, nodes, m, exact, counter):
    lam, mu = params.lam, params.mu
    vmax = blowup_bound(lam)
    tol = params.outer_tol
    inner_tol = 0.1 * tol

    def run(ca, cb):
        counter.calls += 1
        _, _, ia, ib = _sweep(ca, cb, nodes, m, vmax)
        return ia[-1], ib[-1]

    def solve_cb(ca):
        """Return ``(cb, int e^v)`` with ``cb * int e^-v = lam``."""
        lo = exact.j
        cache = {}

        def g(log_cb):
            cb = math.exp(log_cb)
            try:
                ia, ib = run(ca, cb)
            except BlowUp as exc:
                return -BLOWUP_SENTINEL if exc.direction > 0 else BLOWUP_SENTINEL
            cache[log_cb] = ia
            val = math.log(cb * ib / lam)
            if abs(val) <= inner_tol:
                raise _Hit(log_cb)
            return val

        x_lo = math.log(lo)
        try:
            g_lo = g(x_lo)
            step = math.log1p(4.0 / lam)
            x_hi = x_lo + step
            while g(x_hi) <= 0.0:
                x_lo, step = x_hi, 2.0 * step
                x_hi = x_lo + step
                if step > 50.0:
                    raise NoConvergence("could not bracket coef_b")
            if g_lo > 0.0:
                raise NoConvergence("lower coef_b bracket is not below the root")
            x = brentq(g, x_lo, x_hi, xtol=1e-300, rtol=4.0 * np.finfo(float).eps, maxiter=200)
        except _Hit as hit:
            x = hit.x
        cb = math.exp(x)
        if x not in cache:
            cache[x] = run(ca, cb)[0]
        return cb, cache[x]

    if mu == 0.0:
        cb, _ = solve_cb(0.0)
        return 0.0, cb, 1

    outer = _Counter()

    def h(log_ca):
        outer.calls += 1
        if outer.calls > params.max_outer_iters:
            raise NoConvergence(f"outer root finder exceeded {params.max_outer_iters} evaluations")
        ca = math.exp(log_ca)
        _, ia = solve_cb(ca)
        val = math.log(ca * ia / mu)
        if abs(val) <= tol * 0.5:
            raise _Hit(log_ca)
        return val

    # int e^v lies between 1 / I and 1, so ca = mu / int e^v lies in [mu, mu I]
    x_lo, x_hi = math.log(mu), math.log(mu * exact.i)
    try:
        h_lo = h(x_lo)
        h_hi = h(x_hi)
        if h_lo > 0 or h_hi < 0:
            raise NoConvergence("outer bracket for coef_a does not straddle the root")
        x = brentq(h, x_lo, x_hi, xtol=1e-300, rtol=4.0 * np.finfo(float).eps, maxiter=200)
    except _Hit as hit:
        x = hit.x
    ca = math.exp(x)
    cb, _ = solve_cb(ca)
    return ca, cb, outer.calls


# Newton unknowns per node: v, v', int_0^r e^v, int_0^r e^-v, log ca, log cb
_NS = 6
# bandwidths of the block-bidiagonal system with 4 left and 2 right conditions
_LOWER, _UPPER = 9, 7


def _ms_eval(lam, mu, nodes, z, m):
    """Residual of the all-at-once system and the interval-map sensitivities.

    Rows: four conditions at ``r = 0``, six continuity rows per interval and
    the two consistency conditions ``ca A(1) = mu``, ``cb B(1) = lam`` (the
    first replaced by ``log ca = 0`` when ``mu = 0``).
    """
    n = len(nodes) - 1
    s = z.reshape(n + 1, _NS)
    th = s[:-1, 4:6]
    ca = math.exp(s[0, 4]) if mu > 0 else 0.0
    cb = math.exp(s[0, 5])
    phi, jac, ok = rk4_interval_maps(ca, cb, nodes, s[:, 0].copy(), s[:, 1].copy(), m)
    if not ok.all():
        return None
    res = np.empty_like(z)
    res[0:4] = s[0, 0:4]
    body = res[4 : 4 + _NS * n].reshape(n, _NS)
    body[:, 0] = s[1:, 0] - phi[:, 0]
    body[:, 1] = s[1:, 1] - phi[:, 1]
    body[:, 2] = s[1:, 2] - (s[:-1, 2] + phi[:, 2])
    body[:, 3] = s[1:, 3] - (s[:-1, 3] + phi[:, 3])
    body[:, 4:6] = s[1:, 4:6] - th
    last = s[-1]
    res[-2] = last[4] if mu == 0 else math.exp(last[4]) * last[2] / mu - 1.0
    res[-1] = math.exp(last[5]) * last[3] / lam - 1.0
    return res, jac


def _ms_merit(res, z):
    scale = np.ones_like(res)
    scale[4:-2] = 1.0 + np.abs(z[_NS:])
    return float(np.max(np.abs(res / scale)))


def _ms_banded(lam, mu, z, jac):
    n = jac.shape[0]
    size = _NS * (n + 1)
    ab = np.zeros((_LOWER + _UPPER + 1, size))

    def put(row, col, val):
        ab[_UPPER + row - col, col] = val

    for q in range(4):
        put(q, q, 1.0)
    i = np.arange(n)
    base_r = 4 + _NS * i
    base_c = _NS * i
    for q in range(_NS):
        put(base_r + q, base_c + _NS + q, 1.0)
    # continuity rows: derivative with respect to the interval's start state
    for q in range(4):
        for src, col in ((0, 0), (1, 1), (2, 4), (3, 5)):
            put(base_r + q, base_c + col, -jac[:, q, src])
        if q >= 2:
            put(base_r + q, base_c + q, -1.0)
    if mu == 0:
        # log ca is frozen at zero and ca itself is zero
        for q in range(4):
            put(base_r + q, base_c + 4, 0.0)
    for q in (4, 5):
        put(base_r + q, base_c + q, -1.0)
    s_last = z[-_NS:]
    r = size - 2
    c = size - _NS
    if mu == 0:
        put(r, c + 4, 1.0)
    else:
        ea = math.exp(s_last[4]) / mu
        put(r, c + 2, ea)
        put(r, c + 4, ea * s_last[2])
    eb = math.exp(s_last[5]) / lam
    put(r + 1, c + 3, eb)
    put(r + 1, c + 5, eb * s_last[3])
    return ab


def _pack(v, p, th, nodes, lam, mu, ca_log, m):
    """Newton state from node values of ``(v, v')`` and the log coefficients."""
    n = len(nodes) - 1
    ca = math.exp(ca_log[0]) if mu > 0 else 0.0
    cb = math.exp(ca_log[1])
    phi = rk4_interval_maps(ca, cb, nodes, v, p, m)[0]
    s = np.zeros((n + 1, _NS))
    s[:, 0] = v
    s[:, 1] = p
    s[1:, 2] = np.cumsum(phi[:, 2])
    s[1:, 3] = np.cumsum(phi[:, 3])
    s[:, 4] = ca_log[0] if mu > 0 else 0.0
    s[:, 5] = ca_log[1]
    return s.reshape(-1)


def _ms_newton(lam, mu, nodes, z, m, accept_tol, counter):
    """Damped Newton on the banded system; returns the converged state and iterations."""
    z = z.copy()
    ev = _ms_eval(lam, mu, nodes, z, m)
    counter.calls += 1
    if ev is None:
        raise NoConvergence("initial guess overflows the interval maps")
    merit = _ms_merit(ev[0], z)
    for it in range(1, NEWTON_MAX_ITERS + 1):
        if merit <= NEWTON_RES_TOL:
            return z, it - 1
        res, jac = ev
        try:
            step = solve_banded((_LOWER, _UPPER), _ms_banded(lam, mu, z, jac), -res)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(f"singular Newton system: {exc}", residual=merit) from exc
        if not np.all(np.isfinite(step)):
            raise NoConvergence("non-finite Newton step", residual=merit)
        t = 1.0
        while True:
            z_new = z + t * step
            ev_new = _ms_eval(lam, mu, nodes, z_new, m)
            counter.calls += 1
            if ev_new is not None:
                merit_new = _ms_merit(ev_new[0], z_new)
                if merit_new < (1.0 - 1e-4 * t) * merit or merit_new <= NEWTON_RES_TOL:
                    break
            t *= 0.5
            if t < 1e-3:
                if merit <= accept_tol:
                    return z, it
                raise NoConvergence("Newton line search failed", residual=merit)
        z, ev, merit = z_new, ev_new, merit_new
    if merit <= accept_tol:
        return z, NEWTON_MAX_ITERS
    raise NoConvergence(f"Newton did not converge in {NEWTON_MAX_ITERS} iterations", residual=merit)


def _local_substeps_ok(ca, cb, nodes, v, p, m, ode_tol):
    fine = rk4_interval_maps(ca, cb, nodes, v, p, 2 * m)[0]
    coarse = rk4_interval_maps(ca, cb, nodes, v, p, m)[0]
    err = np.abs(fine[:, 0] - coarse[:, 0]) / (1.0 + np.abs(fine[:, 0]))
    return bool(np.max(err) <= ode_tol)


def _solve_newton(params, nodes, m, exact, counter):
    """All-at-once Newton with continuation in ``mu`` from the one-species profile.

    Returns the packed Newton state and the total Newton iterations.
    """
    lam, mu = params.lam, params.mu
    accept_tol = 0.1 * params.outer_tol
    v = eval_u(exact, nodes)
    p = eval_du(exact, nodes)
    log_cb = math.log(exact.j)

    if mu == 0.0:
        z = _pack(v, p, None, nodes, lam, 0.0, (0.0, log_cb), m)
        return _ms_newton(lam, 0.0, nodes, z, m, accept_tol, counter)

    # the one-species profile is an accurate guess while mu e^{-u(1)} / lam is small
    mu_c = min(mu, 0.1 / lam)
    log_ca = math.log(mu_c / _exp_u_integral(exact))
    z = _pack(v, p, None, nodes, lam, mu_c, (log_ca, log_cb), m)
    z, iters = _ms_newton(lam, mu_c, nodes, z, m, accept_tol, counter)
    prev = None
    log_step = math.log(10.0)
    steps = 0
    shift = np.zeros_like(z)
    shift[4::_NS] = 1.0
    while mu_c < mu:
        steps += 1
        if steps > MAX_CONTINUATION_STEPS:
            raise NoConvergence(f"continuation in mu stalled at mu = {mu_c!r}")
        mu_next = min(mu, mu_c * math.exp(log_step))
        delta = math.log(mu_next / mu_c)
        if prev is not None:
            # secant predictor along log mu
            z0 = z + (delta / prev[1]) * (z - prev[0])
        else:
            z0 = z + delta * shift
        try:
            z1, k = _ms_newton(lam, mu_next, nodes, z0, m, accept_tol, counter)
        except NoConvergence:
            log_step *= 0.5
            prev = None
            if log_step < 1e-4:
                raise
            continue
        iters += k
        prev = (z, delta)
        z, mu_c = z1, mu_next
        if k <= 4:
            log_step = min(2.0 * log_step, math.log(1e3))
    return z, iters


def _solve_picard(params, exact, nodes, m, counter):
    lam, mu, theta = params.lam, params.mu, params.damping
    vmax = blowup_bound(lam)
    x = np.array([_exp_u_integral(exact), exact.i])
    jac = None
    prev = None
    change = math.inf
    for it in range(1, params.max_outer_iters + 1):
        try:
            counter.calls += 1
            _, _, ia, ib = _sweep(mu / x[0], lam / x[1], nodes, m, vmax)
        except BlowUp as exc:
            raise NoConvergence(
                f"Picard iterate blew up at iteration {it}: {exc}", residual=change
            ) from exc
        new = np.array([ia[-1], ib[-1]])
        if mu == 0.0:
            new[0] = x[0]
        change = float(np.max(np.abs(new / x - 1.0)))
        if change <= params.outer_tol:
            return mu / new[0], lam / new[1], it
        # fixed-point defect in log variables
        f = np.log(new) - np.log(x)
        if change < 1e-3 and prev is not None:
            dx, df = np.log(x) - prev[0], f - prev[1]
            if jac is None:
                jac = -np.eye(2)
            denom = float(dx @ dx)
            if denom > 0:
                jac = jac + np.outer(df - jac @ dx, dx) / denom
            try:
                step = -np.linalg.solve(jac, f)
            except np.linalg.LinAlgError:
                step = theta * f
        else:
            step = theta * f
        prev = (np.log(x), f)
        x = x * np.exp(step)
    raise NoConvergence(
        f"Picard iteration did not converge in {params.max_outer_iters} steps "
        f"(last relative change {change:.3e})",
        residual=change,
    )


def solve_ccpb(params, nodes=None):
    """Solve the two-species problem.

    Parameters
    ----------
    params : CcpbParams
    nodes : array_like, optional
        Overrides the default graded grid of ``params.grid_size`` intervals.

    Returns
    -------
    CcpbSolution

    Raises
    ------
    NoConvergence
        If the consistency residual cannot be brought below ``outer_tol``.
    """
    lam, mu = params.lam, params.mu
    nodes = default_nodes(lam, params.grid_size) if nodes is None else np.asarray(nodes, float)

    if mu == lam:
        # neutral case: the two nonlocal terms cancel identically
        zeros = np.zeros_like(nodes)
        return CcpbSolution(params, nodes, zeros, zeros.copy(), 1.0, 1.0, mu, lam, 0, True)

    exact = SingleSpeciesSolution.from_lambda(lam)
    counter = _Counter()
    # substeps from the one-species problem, which is always regular;
    # re-checked at the converged coefficients
    m = choose_substeps(0.0, exact.j, nodes, params.ode_tol, lam)
    if params.method == "newton":
        z, iters = _solve_newton(params, nodes, m, exact, counter)
        for _ in range(4):
            st = z.reshape(-1, _NS)
            ca = math.exp(st[0, 4]) if mu > 0 else 0.0
            cb = math.exp(st[0, 5])
            if _local_substeps_ok(ca, cb, nodes, st[:, 0].copy(), st[:, 1].copy(), m, params.ode_tol):
                break
            m *= 2
            log.info("refining to %d substeps per interval", m)
            z, k = _ms_newton(lam, mu, nodes, z, m, 0.1 * params.outer_tol, counter)
            iters += k
        st = z.reshape(-1, _NS)
        ca = math.exp(st[0, 4]) if mu > 0 else 0.0
        cb = math.exp(st[0, 5])
        v, p = st[:, 0].copy(), st[:, 1].copy()
        # the Newton solve meets these to ~1e-24; state them exactly
        v[0] = p[0] = 0.0
        phi = rk4_interval_maps(ca, cb, nodes, v, p, m)[0]
        counter.calls += 1
        ivp = IvpSolution(nodes, v, p, float(phi[:, 2].sum()), float(phi[:, 3].sum()), m)
    else:
        for _ in range(4):
            if params.method == "picard":
                ca, cb, iters = _solve_picard(params, exact, nodes, m, counter)
            else:
                ca, cb, iters = _solve_bracketed(params, nodes, m, exact, counter)
            m_final = choose_substeps(ca, cb, nodes, params.ode_tol, lam, start=m)
            if m_final <= m:
                break
            log.info("re-solving with %d substeps (was %d)", m_final, m)
            m = m_final
        ivp = integrate_ivp(ca, cb, nodes, substeps=m, lam=lam)
        counter.calls += 1

    ra, rb = _residuals(params, ca, cb, ivp)
    residual = max(abs(ra), abs(rb))
    if residual > params.outer_tol:
        raise NoConvergence(
            f"consistency residual {residual:.3e} above outer_tol {params.outer_tol:.1e}",
            residual=residual,
        )
    log.debug("ccpb lam=%g mu=%g: %d outer iters, %d sweeps", lam, mu, iters, counter.calls)
    return CcpbSolution(
        params=params,
        nodes=nodes,
        v=ivp.v,
        dv=ivp.dv,
        a=ivp.int_exp_v,
        b=ivp.int_exp_neg_v,
        coef_a=ca,
        coef_b=cb,
        outer_iters=iters,
        converged=True,
        residual=residual,
        ivp_calls=counter.calls,
        substeps=m,
    )


# relative floor below which node differences are treated as round-off; in
# the neutral bulk of strongly coupled profiles the true variation of v is
# exponentially small and cannot be resolved in double precision
ROUNDOFF_FLOOR = 1e-14


def check_solution(ccpb):
    """Assert the structural invariants of a converged profile.

    Checks ``v(0) = v'(0) = 0``, that ``v`` and ``v'`` decrease (up to
    :data:`ROUNDOFF_FLOOR`), ``v'(1) = mu - lam`` within ``ode_tol (lam + mu)``
    and ``1 <= a b <= lam / mu``.

    Raises
    ------
    InvariantViolation
    """
    v, dv, lam, mu = ccpb.v, ccpb.dv, ccpb.lam, ccpb.mu
    if v[0] != 0.0 or dv[0] != 0.0:
        raise InvariantViolation("v(0) and v'(0) must vanish", index=0)
    if mu == lam:
        if np.any(np.abs(v) > 1e-12):
            raise InvariantViolation("neutral profile is not identically zero")
        return
    floor = ROUNDOFF_FLOOR * (1.0 + np.abs(v))
    bad = np.flatnonzero(np.diff(v) >= floor[1:])
    if bad.size:
        i = int(bad[0]) + 1
        raise InvariantViolation(f"v does not decrease at r = {ccpb.nodes[i]!r}", index=i)
    dfloor = ROUNDOFF_FLOOR * (1.0 + np.abs(dv))
    bad = np.flatnonzero(np.diff(dv) >= dfloor[1:])
    if bad.size:
        i = int(bad[0]) + 1
        raise InvariantViolation(f"v is not concave at r = {ccpb.nodes[i]!r}", index=i)
    n = len(v) - 1
    if abs(dv[-1] - (mu - lam)) > ccpb.params.ode_tol * (lam + mu):
        raise InvariantViolation(f"v'(1) = {dv[-1]!r} differs from mu - lam", index=n)
    ab = ccpb.a * ccpb.b
    if not ab >= 1.0 - 1e-12:
        raise InvariantViolation(f"a b = {ab!r} is below 1")
    if mu > 0 and not ab <= (lam / mu) * (1.0 + 1e-12):
        raise InvariantViolation(f"a b = {ab!r} exceeds lam / mu = {lam / mu!r}")


def w_bound(lam, mu, u1):
    """Upper bound for ``exp(w(1))``: ``(1 - q)^2 + (2 - q) q e^{-u(1)}`` with ``q = mu/lam``."""
    q = mu / lam
    return (1.0 - q) ** 2 + (2.0 - q) * q * math.exp(-u1)


def w_profile(ccpb, tol=None):
    """``w = v - u`` and its derivative on the solution grid, with invariant checks.

    ``tol`` is the slack allowed for the sign and monotonicity checks; by
    default it scales with ``ode_tol`` and the size of ``u``.

    Raises
    ------
    InvariantViolation
        At the first node where ``w < 0``, ``w`` decreases, ``dw < 0``, the
        boundary slope differs from ``mu``, or ``w(1)`` exceeds its bound.
    """
    lam, mu = ccpb.lam, ccpb.mu
    exact = SingleSpeciesSolution.from_lambda(lam)
    u = eval_u(exact, ccpb.nodes)
    du = eval_du(exact, ccpb.nodes)
    w = ccpb.v - u
    dw = ccpb.dv - du
    p = ccpb.params
    if tol is None:
        tol = 100.0 * max(p.ode_tol, p.outer_tol) * (1.0 + np.abs(u))
    dtol = 100.0 * max(p.ode_tol, p.outer_tol) * (lam + mu) + 1e-9 * np.abs(du)

    if abs(w[0]) > 1e-15:
        raise InvariantViolation(f"w(0) = {w[0]!r} is not zero", index=0)
    bad = np.flatnonzero(w < -tol)
    if bad.size:
        i = int(bad[0])
        raise InvariantViolation(f"w < 0 at r = {ccpb.nodes[i]!r} (w = {w[i]!r})", index=i)
    bad = np.flatnonzero(np.diff(w) < -(tol[1:] + tol[:-1]))
    if bad.size:
        i = int(bad[0]) + 1
        raise InvariantViolation(f"w decreases at r = {ccpb.nodes[i]!r}", index=i)
    bad = np.flatnonzero(dw < -dtol)
    if bad.size:
        i = int(bad[0])
        raise InvariantViolation(f"w' < 0 at r = {ccpb.nodes[i]!r} (w' = {dw[i]!r})", index=i)
    n = len(w) - 1
    if abs(dw[-1] - mu) > 1e-6 * lam:
        raise InvariantViolation(f"w'(1) = {dw[-1]!r} differs from mu = {mu!r}", index=n)
    bound = w_bound(lam, mu, float(u[-1]))
    if mu > 0 and not math.exp(w[-1]) < bound * (1.0 + 1e-12) + tol[-1]:
        raise InvariantViolation(
            f"exp(w(1)) = {math.exp(w[-1])!r} exceeds its bound {bound!r}", index=n
        )
    return WProfile(ccpb.nodes, w, dw, bound)


def first_integral_defect(ccpb):
    """``dv^2 / 2 - [mu (e^v - 1) / a + lam (e^-v - 1) / b]`` at every node."""
    v = ccpb.v
    return 0.5 * ccpb.dv ** 2 - (ccpb.coef_a * np.expm1(v) + ccpb.coef_b * np.expm1(-v))


def squeeze_interval(ccpb):
    """``(lam / I, lam e^{w(1)} / I)``, which must contain ``lam / b`` for ``mu > 0``."""
    exact = SingleSpeciesSolution.from_lambda(ccpb.lam)
    w1 = float(ccpb.v[-1] - eval_u(exact, 1.0))
    lo = ccpb.lam / exact.i
    return lo, lo * math.exp(w1)


def c1_distance(ccpb):
    """``sup |v - u| + sup |v' - u'|`` over the grid (no invariant checks)."""
    exact = SingleSpeciesSolution.from_lambda(ccpb.lam)
    w = ccpb.v - eval_u(exact, ccpb.nodes)
    dw = ccpb.dv - eval_du(exact, ccpb.nodes)
    return float(np.max(np.abs(w)) + np.max(np.abs(dw)))


def fixed_lambda_rule(mus):
    """Sweep rule pairing every ``lam`` with each ``mu`` in ``mus``."""
    mus = tuple(mus)
    return lambda lam: mus


def coupled_rule(c, beta):
    """Sweep rule ``mu = c / lam**beta``; ``beta > 1`` makes ``mu lam -> 0``."""
    return lambda lam: (c / lam ** beta,)


def convergence_study(lambda_sweep, mu_rule, base=None):
    """Distances between two-species and one-species profiles across a sweep.

    Parameters
    ----------
    lambda_sweep : iterable of float
    mu_rule : callable
        Maps ``lam`` to an iterable of ``mu`` values.
    base : CcpbParams, optional
        Template for every other solver parameter.

    Returns
    -------
    list of dict
        Rows with ``lambda, mu, sup_w, sup_dw, c1, w1, bound, error``; a failed
        point carries ``error`` and NaN distances, and the sweep continues.
    """
    base = base or CcpbParams(lam=1.0)
    rows = []
    for lam in lambda_sweep:
        for mu in mu_rule(lam):
            row = {"lambda": float(lam), "mu": float(mu), "error": None}
            try:
                sol = solve_ccpb(replace(base, lam=float(lam), mu=float(mu)))
                exact = SingleSpeciesSolution.from_lambda(lam)
                u = eval_u(exact, sol.nodes)
                w = sol.v - u
                dw = sol.dv - eval_du(exact, sol.nodes)
                row.update(
                    sup_w=float(np.max(np.abs(w))),
                    sup_dw=float(np.max(np.abs(dw))),
                    w1=float(w[-1]),
                    bound=w_bound(lam, mu, float(u[-1])),
                )
                row["c1"] = row["sup_w"] + row["sup_dw"]
            except (NoConvergence, BlowUp, InvalidParams) as exc:
                log.warning("sweep point lam=%g mu=%g failed: %s", lam, mu, exc)
                nan = float("nan")
                row.update(sup_w=nan, sup_dw=nan, c1=nan, w1=nan, bound=nan, error=str(exc))
            rows.append(row)
    return rows


def solution_csv(ccpb):
    """``r,v,dv,u,w`` columns for a converged solution."""
    exact = SingleSpeciesSolution.from_lambda(ccpb.lam)
    u = eval_u(exact, ccpb.nodes)
    return columns_csv_text({"r": ccpb.nodes, "v": ccpb.v, "dv": ccpb.dv, "u": u, "w": ccpb.v - u})


def solution_sidecar(ccpb):
    """JSON metadata written next to :func:`solution_csv`."""
    return json_text(
        {
            "lambda": ccpb.lam,
            "mu": ccpb.mu,
            "a": ccpb.a,
            "b": ccpb.b,
            "outer_iters": ccpb.outer_iters,
            "converged": ccpb.converged,
        }
    )
