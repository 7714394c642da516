"""A semigroup that turns positive only after a while.

The rank-one-dominant generator has a simple eigenvalue 0 with positive left
and right eigenvectors, while the rest of the spectrum spirals inward at
-1 +/- 5i. For small t the oscillating part wins and e^{tA} has negative
entries. Once it has decayed, the rank-one part v phi^T / (phi^T v) takes over.

Run with ``python demos/01_eventual_positivity.py``.
"""

# %%
import numpy as np

from evpos import zoo
from evpos.certify import pf_semigroup, pf_semigroup_corollary
from evpos.semigroup import expm, find_t0, find_t0_uniform, modulus_estimate
from evpos.spectral import analyze, spectral_projection

A = zoo.make_rank_one_dominant(3, seed=0)
print(A.name)
print(np.array2string(A.matrix, precision=3))

summary = analyze(A)
print("eigenvalues:", np.round(summary.eigenvalues, 6))
print("spectral bound", summary.spectral_bound, "dominant", summary.dominant)

# %% The exponential at a few times
for t in (0.05, 0.1, 0.5, 2.0, 20.0):
    E = expm(A, t)
    print(f"t = {t:5.2f}   min entry {E.min():+.4f}")

# %% Where does positivity set in?
tv = find_t0_uniform(A)
print(f"uniform t0 = {tv.t0:.4f} on [0, {tv.t_max:.1f}]")
print("per-column t0:", np.round(tv.column_t0, 4))
for j in range(3):
    v = find_t0(A, np.eye(3)[j])
    print(f"  e_{j + 1}: t0 = {v.t0:.4f}")

# the trace is negative for small t and settles to a positive value
for t, eps in tv.margins[:: max(1, len(tv.margins) // 12)]:
    print(f"  t = {t:9.4f}   margin {eps:+.5f}")

# %% The limit of the rescaled flow is the spectral projection
P = spectral_projection(A, 0.0).P
print("projection:")
print(np.array2string(P, precision=4))
print("||e^{40A} - P||_max =", np.abs(expm(A, 40.0) - P).max())

# %% Certificates
for rep in (pf_semigroup(A, time_verdict=tv), pf_semigroup_corollary(A, time_verdict=tv)):
    print(rep.theorem_id, rep.overall)
    for c in rep.conclusion.checks:
        print(f"   {c.name:45s} {c.holds}")

# %% Modulus estimate: |e^{tA} f| <= e^{tA}|f| from some time on
rng = np.random.default_rng(3)
for _ in range(4):
    f = rng.standard_normal(3)
    print(np.round(f, 3), "->  t1 =", modulus_estimate(A, f))
