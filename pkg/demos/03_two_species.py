"""
Two ion species
===============

With anions present (mu > 0) there is no closed form.  The solver returns
v on a graded grid; as mu drops the profile approaches the single-species
u, and when mu equals lambda the two charges cancel and v vanishes.
"""

import numpy as np

from ionlayer import ccpb
from ionlayer.exact import SingleSpeciesSolution, eval_u

lam = 1e4
exact = SingleSpeciesSolution.from_lambda(lam)
for mu in (1e4, 1e3, 1e2, 10.0, 1.0, 0.0):
    sol = ccpb.solve_ccpb(ccpb.CcpbParams(lam=lam, mu=mu))
    ccpb.check_solution(sol)
    prof = ccpb.w_profile(sol)
    print(
        f"mu={mu:8g}  v(1)={sol.v[-1]:9.4f}  a*b={sol.a * sol.b:10.4f}"
        f"  C1 distance to u={ccpb.c1_distance(sol):10.4g}  w(1)={prof.w1:.3e}"
    )

# shrinking mu faster than 1/lambda sends the distance to zero
for row in ccpb.convergence_study([1e2, 1e3, 1e4], ccpb.coupled_rule(1.0, 2.0)):
    print(f"lambda={row['lambda']:g} mu={row['mu']:g}  C1={row['c1']:.3e}  bound={row['bound']:.6f}")

# neutral bulk: for large mu the profile is flat until the very edge
sol = ccpb.solve_ccpb(ccpb.CcpbParams(lam=lam, mu=1e3))
u = eval_u(exact, sol.nodes)
i = np.searchsorted(sol.nodes, 0.999)
print("v at r=0.999 with mu=1e3:", sol.v[i], " single species:", u[i])
