import numpy as np
import pytest

from evpos import zoo
from evpos.errors import ClusterAmbiguityError, NotAnEigenvalueError
from evpos.resolvent import ScanSchedule, laurent_limit
from evpos.spectral import (
    Operator,
    analyze,
    cluster_projection,
    laurent_coefficient,
    multiplicities,
    spectral_bound,
    spectral_gap,
    spectral_projection,
    tol_proj,
)
from oracles import jordan_resolvent


def test_operator_validation():
    with pytest.raises(ValueError):
        Operator(np.ones((2, 3)))
    with pytest.raises(ValueError):
        Operator(np.array([[np.inf]]))


def test_analyze_diagonal():
    s = analyze(np.diag([-1.0, -2.0]))
    assert s.spectral_bound == -1.0
    assert [c.center for c in s.peripheral] == [-1.0]
    assert s.dominant == -1.0


def test_analyze_rotation(rotation):
    s = analyze(rotation)
    assert s.spectral_bound == pytest.approx(0.0, abs=1e-15)
    assert sorted(c.center.imag for c in s.peripheral) == pytest.approx([-1.0, 1.0])
    assert s.dominant is None


def test_analyze_rank_one_dominant():
    A = zoo.make_rank_one_dominant(5, 2)
    s = analyze(A)
    assert s.dominant == pytest.approx(0.0, abs=1e-8)
    assert spectral_gap(A, s) == pytest.approx(1.0, abs=1e-8)
    assert sum(c.multiplicity for c in s.clusters) == 5


def test_conjugate_pairs_reported():
    s = analyze(zoo.make_rank_one_dominant(5, 4))
    im = sorted(z.imag for z in s.eigenvalues)
    assert im == pytest.approx(sorted(-x for x in im), abs=1e-10)


def test_projection_diag(diag01):
    p = spectral_projection(diag01, 0.0)
    assert np.array_equal(p.P, np.diag([1.0, 0.0])) or np.allclose(p.P, np.diag([1.0, 0.0]), atol=1e-14)
    assert p.pole_order == 1
    assert laurent_coefficient(p, -1) is p.laurent_neg[0]


def test_projection_jordan_two():
    J = np.array([[0.0, 1.0], [0.0, 0.0]])
    p = spectral_projection(J, 0.0)
    assert np.allclose(p.P, np.eye(2))
    assert p.pole_order == 2
    assert np.allclose(laurent_coefficient(p, -2), J)
    # the explicit resolvent has 1/lam^2 * J as its leading part
    lam = 1e-4
    assert np.allclose(lam**2 * jordan_resolvent(0.0, 2, lam), J + lam * np.eye(2))
    with pytest.raises(IndexError):
        laurent_coefficient(p, -3)
    with pytest.raises(IndexError):
        laurent_coefficient(p, 0)


def test_projection_rank_one_matches_construction():
    A = zoo.make_rank_one_dominant(5, 6)
    adv = A.source["advertised"]
    p = spectral_projection(A, 0.0)
    P_true = np.array(adv["projection"])
    assert np.max(np.abs(p.P - P_true)) <= 1e-8
    assert np.max(np.abs(p.P @ p.P - p.P)) <= tol_proj(A)
    assert p.pole_order == 1


def test_numeric_limit_diag(diag01):
    p = spectral_projection(diag01, 0.0)
    offs, est = laurent_limit(p, -1, ScanSchedule(0.5, 0.5, 30))
    assert offs[-1] == pytest.approx(2.0**-30)
    assert np.max(np.abs(est[-1] - np.diag([1.0, 0.0]))) <= 1e-8


def test_multiplicities():
    assert multiplicities(np.array([[0.0, 1.0], [0.0, 0.0]]), 0.0) == (1, 2)
    assert multiplicities(np.diag([0.0, 0.0, -1.0]), 0.0) == (2, 2)
    assert multiplicities(zoo.make_rank_one_dominant(3, 5), 0.0) == (1, 1)


def test_projection_errors(rotation):
    with pytest.raises(NotAnEigenvalueError):
        spectral_projection(rotation, 0.0)
    with pytest.raises(NotAnEigenvalueError):
        spectral_projection(np.diag([0.0, -1.0]), 0.5)
    with pytest.raises(ClusterAmbiguityError):
        spectral_projection(np.diag([0.0, 1e-7]), 0.0)


@pytest.mark.parametrize("spec", [s for s in zoo.default_specs(6) if s.kind != "biharmonic_1d"], ids=str)
def test_projection_invariants_on_zoo(spec):
    A = spec.build()
    s = analyze(A)
    tol = tol_proj(A)
    total = np.zeros((A.n, A.n), dtype=complex)
    for c in s.clusters:
        p = cluster_projection(A, c.center, s)
        P = p.P
        assert np.max(np.abs(P @ P - P)) <= tol
        assert np.max(np.abs(A.matrix @ P - P @ A.matrix)) <= tol * (1 + A.norm)
        N = A.matrix - p.lambda0 * np.eye(A.n)
        m = p.pole_order
        assert np.max(np.abs(np.linalg.matrix_power(N, m) @ P)) <= tol * max(1.0, np.abs(P).sum(1).max())
        assert np.max(np.abs(p.laurent_neg[-1])) > tol
        assert (m == 1) == (p.geom_mult == p.alg_mult)
        total = total + P
    assert np.max(np.abs(total - np.eye(A.n))) <= 10 * tol


def test_similarity_covariance():
    rng = np.random.default_rng(9)
    for seed in range(10):
        A = zoo.make_random_stable(5, seed)
        Q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
        S = Q @ np.diag(rng.uniform(1.0, 3.0, 5))
        B = S @ A.matrix @ np.linalg.inv(S)
        ea = np.sort_complex(np.array(analyze(A).eigenvalues))
        eb = np.sort_complex(np.array(analyze(B).eigenvalues))
        tol = analyze(B).tol_cluster
        assert np.max(np.abs(ea - eb)) <= tol


def test_spectral_bound_helpers():
    assert spectral_bound(np.diag([-3.0, 2.0])) == 2.0
    assert spectral_gap(np.eye(2)) is None
