"""Looking for an unbounded rescaled semigroup among strongly positive ones.

Question explored: if e^{tA} is strongly positive for every t > 0, must
e^{t(A - s(A))} stay bounded? For matrices the answer is yes. Strong
positivity of one e^{tA} makes it a positive matrix, so by Perron's theorem
its spectral radius is a simple eigenvalue. Then s(A) is a simple pole and the
rescaled flow converges. The search below confirms this on random instances.
It can only ever find finite-dimensional evidence.
"""

# %%
import numpy as np

from evpos import zoo
from evpos.semigroup import TimeGrid, find_t0_uniform, peripheral_pole_orders, rescaled_bound
from evpos.spectral import Operator

rng = np.random.default_rng(2024)
tried = immediately_positive = unbounded = 0

for trial in range(300):
    n = int(rng.integers(2, 7))
    # a Metzler matrix plus a perturbation that may break the sign structure
    base = zoo.make_metzler(n, trial).matrix
    A = Operator(base + rng.normal(0.0, 0.3, (n, n)) * (rng.random((n, n)) < 0.3))
    tried += 1
    grid = TimeGrid(20.0, 0.0, 48)
    tv = find_t0_uniform(A, grid=grid)
    if not tv.holds or tv.t0 > grid.points()[1]:
        continue
    immediately_positive += 1
    b = rescaled_bound(A, grid)
    if not b.bounded:
        unbounded += 1
        print("candidate:", A.matrix, peripheral_pole_orders(A))

print(f"{tried} instances, {immediately_positive} strongly positive from the first grid time, {unbounded} unbounded")

# %% The contrast: a defective dominant pole gives an unbounded rescaled flow
J = zoo.make_jordan(0.0, 2)
b = rescaled_bound(J, TimeGrid(50.0))
print("Jordan block: bounded =", b.bounded, " sup norm on grid =", round(b.sup_norm, 3))
print("strongly positive eventually:", find_t0_uniform(J).holds)
