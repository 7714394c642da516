"""Sign pattern of the discretized bi-harmonic heat flow.

The periodic five-point discretization of -d^4/dx^4 has no maximum principle:
the kernel e^{tA} takes negative values for short times. On a finite mesh the
kernel flattens towards the constant 1/n as t grows, which is positive. This is
exploration only. Nothing here says anything about the continuous problem.
"""

# %%
import numpy as np

from evpos import zoo
from evpos.certify import pf_semigroup
from evpos.semigroup import TimeGrid, expm, find_t0_uniform

mesh = 32
A = zoo.make_biharmonic_1d(mesh)
h = 1.0 / mesh
print(f"mesh {mesh}, ||A|| = {A.norm:.3e}, h^4 = {h**4:.3e}")

# %% Smallest entry of the kernel against time, in units of h^4
for k in (1e-6, 1e-3, 1e-1, 1.0, 10.0, 1e2, 1e3, 1e4):
    E = expm(A, k * h**4)
    print(f"t = {k:8.0e} h^4   min {E.min():+.3e}   max {E.max():.3e}")

# %% Time when every column becomes strictly positive, for several meshes
for n in (8, 16, 24, 32, 48):
    B = zoo.make_biharmonic_1d(n)
    tv = find_t0_uniform(B)
    rep = pf_semigroup(B, time_verdict=tv)
    print(f"mesh {n:3d}: t0 = {tv.t0:.4e}  (t0 / h^4 = {tv.t0 * n**4:8.2f})  {rep.overall}")

# %% One column of the kernel around t0: the far side of the circle goes negative
tv = find_t0_uniform(A, grid=TimeGrid(1e-2, 0.0, 80))
for t in (0.5 * tv.t0, 0.9 * tv.t0, 1.1 * tv.t0, 2.0 * tv.t0):
    col = expm(A, t)[:, 0]
    print(f"t = {t:.3e}: min {col.min():+.3e} at node {int(np.argmin(col))}")
