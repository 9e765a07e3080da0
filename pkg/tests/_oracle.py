"""High-precision reference values computed independently with mpmath."""

import mpmath as mp

mp.mp.dps = 50


def gap(lam):
    """Root ``e`` of ``tan(e) = (pi - 2 e) / lam`` on (0, pi/2)."""
    lam = mp.mpf(lam)
    f = lambda e: mp.tan(e) - (mp.pi - 2 * e) / lam
    # bracketing solver: tan changes sign exactly once on the open interval
    tiny = mp.mpf(10) ** -40
    return mp.findroot(f, (tiny, mp.pi / 2 - tiny), solver="anderson")


def solution(lam):
    """``(J, k, gap)`` in mpmath precision."""
    e = gap(lam)
    k = mp.pi / 2 - e
    return 2 * k * k, k, e


def u_at_offset(lam, t):
    """``(u, u', rho)`` at ``r = 1 - t`` from ``u = 2 log cos(k r)``."""
    j, k, e = solution(lam)
    y = e + k * mp.mpf(t)
    return 2 * mp.log(mp.sin(y)), -2 * k * mp.cot(y), j / mp.sin(y) ** 2


def i_integral(lam):
    """``int_0^1 exp(-u)`` by mpmath quadrature of ``sec^2(k r)``."""
    j, k, e = solution(lam)
    cuts = sorted({mp.mpf(0), mp.mpf(0.5), max(mp.mpf(0.5), 1 - 10 / mp.mpf(lam)), mp.mpf(1)})
    return mp.quad(lambda r: 1 / mp.cos(k * r) ** 2, cuts)
