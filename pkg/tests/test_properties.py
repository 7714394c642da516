"""Randomized invariants driven by hypothesis."""

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from evpos import mmio, zoo
from evpos.lattice import decompose, dist_to_cone, gauge_norm, strong_pos_margin, tol_zero
from evpos.resolvent import ScanSchedule, resolvent, scan_individual_negative, scan_individual_positive
from evpos.semigroup import expm
from evpos.spectral import Operator, analyze

# subnormals have no relative precision, so ulp-scale bounds do not apply to them
finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False, allow_subnormal=False)
positive = st.floats(1e-3, 1e3, allow_nan=False, allow_infinity=False)
DIM = 6

vectors = arrays(np.float64, DIM, elements=finite)
units = arrays(np.float64, DIM, elements=positive)
SETTINGS = settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@SETTINGS
@given(vectors)
def test_decompose_lattice_identities(f):
    pos, neg, mod = decompose(f)
    assert np.array_equal(pos - neg, f)
    assert np.all(np.minimum(pos, neg) == 0)
    assert np.array_equal(mod, pos + neg)
    assert np.all(pos >= 0) and np.all(neg >= 0)


@SETTINGS
@given(vectors, units)
def test_gauge_dominates(f, u):
    c = gauge_norm(f, u)
    assert np.all(np.abs(f) <= c * u * (1 + 4 * np.finfo(float).eps))


@SETTINGS
@given(vectors, vectors, units, st.floats(-1e3, 1e3, allow_nan=False))
def test_gauge_is_a_norm(f, g, u, a):
    nf, ng = gauge_norm(f, u), gauge_norm(g, u)
    assert abs(gauge_norm(a * f, u) - abs(a) * nf) <= 1e-12 * abs(a) * nf + 1e-300
    assert gauge_norm(f + g, u) <= (nf + ng) * (1 + 1e-12)
    assert (gauge_norm(f, u) == 0) == (not np.any(f))


@SETTINGS
@given(vectors, units, positive)
def test_margin_homogeneity(f, u, a):
    m = strong_pos_margin(f, u)
    assert abs(strong_pos_margin(a * f, u) - a * m) <= 1e-12 * abs(a * m)


@SETTINGS
@given(vectors)
def test_cone_distance_zero_iff_no_negative_part(g):
    _, neg, _ = decompose(g)
    tol = tol_zero(g)
    assert (dist_to_cone(g) <= tol) == bool(np.all(neg <= tol))
    assert (dist_to_cone(g) == 0) == (not np.any(neg))


@SETTINGS
@given(arrays(np.float64, (4, 4), elements=finite))
def test_matrix_market_round_trip(A):
    B = mmio.loads(mmio.dumps(A))
    assert B.tobytes() == (A + 0.0).tobytes()
    assert mmio.dumps(B) == mmio.dumps(A)


seeds = st.integers(0, 2**32)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(2, 7))
def test_similarity_covariance(seed, n):
    A = zoo.make_random_stable(n, seed)
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    S = Q @ np.diag(rng.uniform(1.0, 2.0, n))
    B = Operator(S @ A.matrix @ np.linalg.inv(S))
    ea = np.sort_complex(np.array(analyze(A).eigenvalues))
    eb = np.sort_complex(np.array(analyze(B).eigenvalues))
    assert np.max(np.abs(ea - eb)) <= analyze(B).tol_cluster


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(2, 7))
def test_resolvent_identity_on_schedule_pairs(seed, n):
    A = zoo.make_random_stable(n, seed)
    s = analyze(A).spectral_bound
    lams = ScanSchedule(1.0, 0.5, 12).points(s)
    Rs = [resolvent(A, lam) for lam in lams]
    for i in range(len(lams)):
        for j in range(i + 1, len(lams)):
            lhs = Rs[i] - Rs[j]
            rhs = (lams[j] - lams[i]) * Rs[i] @ Rs[j]
            cond = np.linalg.cond(lams[j] * np.eye(n) - A.matrix)
            assert np.max(np.abs(lhs - rhs)) <= 1e-9 * cond * max(1.0, np.max(np.abs(Rs[j])))


specs = st.sampled_from(zoo.default_specs(50))


@settings(max_examples=60, deadline=None)
@given(specs, st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_semigroup_law_on_zoo(spec, s, t):
    A = spec.build()
    # keep ||tA|| moderate so the exponentials stay representable
    scale = 1.0 / max(1.0, A.norm)
    s, t = s * scale, t * scale
    assert np.array_equal(expm(A, 0.0), np.eye(A.n))
    E = expm(A, s + t)
    assert np.max(np.abs(E - expm(A, s) @ expm(A, t))) <= 1e-9 * np.max(np.abs(E))


@settings(max_examples=30, deadline=None)
@given(seeds, arrays(np.float64, 5, elements=st.floats(0.0, 1.0)))
def test_negative_scan_mirrors_positive(seed, f):
    f = f.copy()
    f[seed % 5] += 0.5
    A = zoo.make_rank_one_dominant(5, seed % 1000)
    neg = scan_individual_negative(A, 0.0, f)
    pos = scan_individual_positive(Operator(-A.matrix), 0.0, f, sched=ScanSchedule.default("above"))
    assert neg.holds == pos.holds
    assert [(-lam, e) for lam, e in neg.margins] == list(pos.margins)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(zoo.KINDS), st.integers(0, 2**63))
def test_zoo_determinism(kind, seed):
    n = {"jordan": 3, "biharmonic_1d": 8}.get(kind, 4)
    spec = zoo.ZooSpec(kind, n, seed)
    assert mmio.dumps(spec.build().matrix) == mmio.dumps(zoo.ZooSpec(kind, n, seed).build().matrix)
