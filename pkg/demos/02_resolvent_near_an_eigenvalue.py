"""Watching the resolvent as lambda approaches an eigenvalue.

Near a simple eigenvalue lambda0 the resolvent behaves like
P / (lambda - lambda0), so the scaled resolvent (lambda - lambda0) R(lambda, A)
converges to the spectral projection. Positivity of R(lambda, A) f for lambda
slightly above lambda0 is what the resolvent scans detect. At a Jordan block
the pole has higher order and the leading coefficient is nilpotent.
"""

# %%
import numpy as np

from evpos import zoo
from evpos.certify import krein_rutman, pf_resolvent
from evpos.resolvent import (
    ScanSchedule,
    asymptotic_positivity,
    laurent_limit,
    limit_schedule,
    scan_individual_positive,
    scan_uniform_positive,
)
from evpos.spectral import Operator, spectral_projection

A = zoo.make_rank_one_dominant(5, seed=3)
p = spectral_projection(A, 0.0)
print("pole order", p.pole_order, " multiplicities", (p.geom_mult, p.alg_mult))

# %% Scaled resolvent against the projection
sched = limit_schedule(A, 0.0, proj=p)
offs, est = laurent_limit(p, -1, sched)
for d, Q in list(zip(offs, est))[:: max(1, len(offs) // 8)]:
    print(f"delta = {d:.3e}   ||delta R - P||_max = {np.abs(Q - p.P).max():.3e}")

# %% Individual and uniform scans from above
for j in range(5):
    v = scan_individual_positive(A, 0.0, np.eye(5)[j])
    print(f"e_{j + 1}: holds={v.holds}  lambda1={v.lambda1}")
u = scan_uniform_positive(A, 0.0)
print("uniform lambda1 =", u.lambda1, "(the smallest of the columns)")

# %% Cone distance of the orbit, scaled by lambda - lambda0
f = np.array([0.0, 0.0, 1.0, 0.0, 0.0])
av = asymptotic_positivity(A, 0.0, f)
for d, dist in list(zip(av.offsets, av.distances))[::4]:
    print(f"delta = {d:.2e}   scaled distance {dist:.3e}")

# %% Both branches of the resolvent certificate
print("A :", pf_resolvent(A, 0.0).hypotheses[-1].evidence)
print("-A:", pf_resolvent(Operator(-A.matrix), 0.0).hypotheses[-1].evidence)
print("Krein-Rutman at 0:", krein_rutman(A, 0.0).overall)

# %% A Jordan block: pole of order 3
J = zoo.make_jordan(0.5, 3)
pj = spectral_projection(J, 0.5)
print("Jordan pole order", pj.pole_order)
_, est = laurent_limit(pj, -3, ScanSchedule())
print("(lambda - lambda0)^3 R(lambda, J) at the last point:")
print(np.array2string(est[-1], precision=6, suppress_small=True))
