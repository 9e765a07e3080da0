"""Compiled inner loops.

Kept separate so the numba dependency is confined to one small file.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True, error_model="numpy")
def _rhs(v, p, ca, cb):
    ev = math.exp(v)
    emv = math.exp(-v)
    return p, ca * ev - cb * emv, ev, emv


@njit(cache=True, error_model="numpy")
def rk4_sweep(ca, cb, nodes, m, vmax):
    """Classical RK4 for ``v'' = ca e^v - cb e^-v`` with running integrals.

    The state is ``(v, v', int e^v, int e^-v)`` so the two integrals share
    the stepping of ``v`` and ``v'(r) = ca * int_0^r e^v - cb * int_0^r e^-v``
    holds to round-off at every node.  ``m`` substeps are taken across each
    node interval.

    Returns ``(v, dv, int_exp_v, int_exp_neg_v, fail)`` where ``fail`` is
    the index of the first node that could not be reached (``-1`` when the
    sweep completed); the state at escape is stored at that index.
    """
    n = nodes.shape[0]
    v_out = np.zeros(n)
    p_out = np.zeros(n)
    a_out = np.zeros(n)
    b_out = np.zeros(n)
    v = 0.0
    p = 0.0
    ia = 0.0
    ib = 0.0
    for i in range(n - 1):
        h = (nodes[i + 1] - nodes[i]) / m
        for _ in range(m):
            k1v, k1p, k1a, k1b = _rhs(v, p, ca, cb)
            k2v, k2p, k2a, k2b = _rhs(v + 0.5 * h * k1v, p + 0.5 * h * k1p, ca, cb)
            k3v, k3p, k3a, k3b = _rhs(v + 0.5 * h * k2v, p + 0.5 * h * k2p, ca, cb)
            k4v, k4p, k4a, k4b = _rhs(v + h * k3v, p + h * k3p, ca, cb)
            v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
            p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
            ia += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
            ib += h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)
            if not (abs(v) <= vmax) or not math.isfinite(p) or not math.isfinite(ib):
                # record the escape direction for the caller
                v_out[i + 1] = v
                p_out[i + 1] = p
                return v_out, p_out, a_out, b_out, i + 1
        v_out[i + 1] = v
        p_out[i + 1] = p
        a_out[i + 1] = ia
        b_out[i + 1] = ib
    return v_out, p_out, a_out, b_out, -1


@njit(cache=True, error_model="numpy")
def _var_rhs(s, S, ca, cb, ds, dS):
    # state derivative and its sensitivity with respect to
    # (v_start, p_start, log ca, log cb)
    ev = math.exp(s[0])
    emv = math.exp(-s[0])
    ta = ca * ev
    tb = cb * emv
    ds[0] = s[1]
    ds[1] = ta - tb
    ds[2] = ev
    ds[3] = emv
    curv = ta + tb
    for j in range(4):
        dv = S[0, j]
        dS[0, j] = S[1, j]
        dS[1, j] = curv * dv
        dS[2, j] = ev * dv
        dS[3, j] = -emv * dv
    dS[1, 2] += ta
    dS[1, 3] -= tb


@njit(cache=True, error_model="numpy")
def rk4_interval_maps(ca, cb, nodes, v, p, m):
    """One-interval RK4 maps started from every node, with sensitivities.

    For each interval ``[nodes[i], nodes[i+1]]`` integrates the augmented
    state from ``(v[i], p[i], 0, 0)`` with ``m`` substeps and returns
    ``phi[i] = (v, p, int e^v, int e^-v)`` at the right end together with
    ``jac[i]``, the 4x4 derivative of ``phi[i]`` with respect to
    ``(v[i], p[i], log ca, log cb)``.  ``ok[i]`` is false when the state
    overflowed.
    """
    n = nodes.shape[0] - 1
    phi = np.zeros((n, 4))
    jac = np.zeros((n, 4, 4))
    ok = np.ones(n, dtype=np.bool_)
    s = np.zeros(4)
    S = np.zeros((4, 4))
    st = np.zeros(4)
    St = np.zeros((4, 4))
    k = np.zeros((4, 4))
    K = np.zeros((4, 4, 4))
    for i in range(n):
        h = (nodes[i + 1] - nodes[i]) / m
        s[0] = v[i]
        s[1] = p[i]
        s[2] = 0.0
        s[3] = 0.0
        S[:, :] = 0.0
        S[0, 0] = 1.0
        S[1, 1] = 1.0
        for _ in range(m):
            _var_rhs(s, S, ca, cb, k[0], K[0])
            for q in range(4):
                st[q] = s[q] + 0.5 * h * k[0, q]
                for j in range(4):
                    St[q, j] = S[q, j] + 0.5 * h * K[0, q, j]
            _var_rhs(st, St, ca, cb, k[1], K[1])
            for q in range(4):
                st[q] = s[q] + 0.5 * h * k[1, q]
                for j in range(4):
                    St[q, j] = S[q, j] + 0.5 * h * K[1, q, j]
            _var_rhs(st, St, ca, cb, k[2], K[2])
            for q in range(4):
                st[q] = s[q] + h * k[2, q]
                for j in range(4):
                    St[q, j] = S[q, j] + h * K[2, q, j]
            _var_rhs(st, St, ca, cb, k[3], K[3])
            for q in range(4):
                s[q] += h / 6.0 * (k[0, q] + 2.0 * k[1, q] + 2.0 * k[2, q] + k[3, q])
                for j in range(4):
                    S[q, j] += h / 6.0 * (K[0, q, j] + 2.0 * K[1, q, j] + 2.0 * K[2, q, j] + K[3, q, j])
        if not (math.isfinite(s[0]) and math.isfinite(s[1]) and math.isfinite(s[3])):
            ok[i] = False
        phi[i, :] = s
        jac[i, :, :] = S
    return phi, jac, ok
