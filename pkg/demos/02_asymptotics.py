"""
Checking the large-lambda expansions
====================================

Each expansion is compared with the exact solution over a lambda sweep.  The
residual multiplied by the first omitted power of lambda should settle to a
constant, and the fitted slope gives the observed order.
"""

from ionlayer import asymptotics as asym
from ionlayer.exact import NearFieldPoint, SingleSpeciesSolution, eval_at_offset

lams = (1e3, 10 ** 3.5, 1e4, 10 ** 4.5, 1e5)
for name in ("j", "i", "u1", "far_u_0.5", "far_du_0.9", "far_rho_0.3"):
    order = 3 if name == "j" else None
    reps = asym.sweep(name, lams, order)
    scaled = ", ".join(f"{r.normalized_residual:9.3f}" for r in reps)
    print(f"{name:12s} observed order {reps[0].observed_order:5.2f}   scaled residuals {scaled}")

# the cubic coefficient of J is a closed-form number
print("predicted lambda^-3 coefficient of J:", asym.J_CUBIC)

# near the wall the behaviour depends on how fast the point approaches r = 1
lam = 1e6
sol = SingleSpeciesSolution.from_lambda(lam)
for alpha in (0.5, 1.0, 1.5, 2.0, 3.0):
    pt = NearFieldPoint(1.0, alpha, lam)
    u, du, _ = eval_at_offset(sol, pt.offset)
    u_pred, du_pred = asym.near_field_u(pt)
    print(f"alpha={alpha:3}  regime {asym.near_field_regime(alpha):3s}  u={u:.6f} ({u_pred:.6f})"
          f"  u'={du:.6e} ({du_pred:.6e})")
