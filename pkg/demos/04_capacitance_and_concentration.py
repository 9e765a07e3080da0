"""
Capacitance and concentration at the wall
=========================================

The capacitance of a thin region next to the wall tends to 1/2 when the
region is thinner than the layer, to g(p) when it scales with the layer and
decays like 1/log(lambda) when it is thicker.  The normalized charge and
field energy both collapse to a point mass at r = 1.
"""

import math

from ionlayer import capacitance as cap
from ionlayer import concentration as conc
from ionlayer.exact import NearFieldPoint, SingleSpeciesSolution

for p, alpha in ((1.0, 2.0), (2.0, 1.0), (1.0, 0.5)):
    for lam in (1e3, 1e4, 1e6):
        sol = SingleSpeciesSolution.from_lambda(lam)
        c = cap.capacitance_exact(sol, NearFieldPoint(p, alpha, lam))
        print(f"p={p} alpha={alpha} lambda={lam:g}  C={c:.6f}  expansion={cap.capacitance_asymptotic(lam, p, alpha):.6f}")

print("g(2) = 1 / (4 log 2) =", cap.g(2.0), 1 / (4 * math.log(2)))

for lam in (1e2, 1e4, 1e6):
    sol = SingleSpeciesSolution.from_lambda(lam)
    row = []
    for h in conc.CATALOG.values():
        row.append(f"{h.id}:{conc.charge_functional(sol, h):.5f}")
    print(f"lambda={lam:g}  charge against h  " + "  ".join(row))
    print(f"            mass away from the wall {conc.localized_mass(sol):.4e}")
