"""
The single-species profile and its boundary layer
=================================================

The one-ion problem has the closed form u(r) = 2 log cos(k r) with
k = sqrt(J/2), where J solves a scalar transcendental equation.  This script
solves for J, looks at how the potential collapses into a thin layer at the
wall as lambda grows, and checks the integral identities.
"""

import numpy as np

from ionlayer.eigenvalue import solve_j
from ionlayer.exact import SingleSpeciesSolution, eval_du, eval_rho, eval_u, exp_neg_u_integral
from ionlayer.quadrature import graded_mesh

# J creeps up to pi^2/2; the deficit shrinks like 2 pi^2 / lambda
for lam in (1.0, 10.0, 1e2, 1e4, 1e6):
    e = solve_j(lam)
    print(f"lambda={lam:8.0e}  J={e.j:.15f}  pi^2/2 - J={np.pi ** 2 / 2 - e.j:.3e}")

sol = SingleSpeciesSolution.from_lambda(1e4)

# most of the drop in u happens within a few multiples of 1/lambda of r = 1
r = np.array([0.0, 0.5, 0.9, 0.99, 0.999, 0.9999, 1.0])
for x, u, du in zip(r, eval_u(sol, r), eval_du(sol, r)):
    print(f"r={x:<7} u={u:10.4f}  u'={du:12.2f}")

# the density integrates to lambda, and Simpson on a graded mesh recovers I
nodes = graded_mesh(1.0 / sol.lam, 4000)
rho = eval_rho(sol, nodes)
print("int rho / lambda (trapezoid) =", np.trapz(rho, nodes) / sol.lam)
print("I closed form =", sol.i, " Simpson =", exp_neg_u_integral(sol))
