import numpy as np
import pytest
import scipy.linalg as sla
from scipy.integrate import trapezoid

from evpos import config, zoo
from evpos.errors import OverflowRiskError
from evpos.semigroup import (
    TimeGrid,
    default_t_max,
    expm,
    find_t0,
    find_t0_uniform,
    modulus_batch,
    modulus_estimate,
    peripheral_pole_orders,
    rescaled_bound,
    smoothing_check,
)
from evpos.spectral import Operator, analyze, spectral_gap
from oracles import dense_sign_changes, expm_eig, expm_eig_mp


def test_expm_examples():
    A = zoo.make_random_stable(4, 1)
    assert np.array_equal(expm(A, 0.0), np.eye(4))
    D = np.diag([0.3, -2.0])
    assert np.allclose(expm(D, 1.7), np.diag(np.exp([0.51, -3.4])), rtol=1e-14)


def test_expm_semigroup_law():
    A = np.random.default_rng(5).standard_normal((6, 6))
    for s in (0.3, 0.7):
        for t in (0.3, 0.7):
            E = expm(A, s + t)
            assert np.max(np.abs(E - expm(A, s) @ expm(A, t))) <= 1e-9 * np.max(np.abs(E))


def test_expm_against_oracles():
    for seed in range(10):
        A = zoo.make_rank_one_dominant(5, seed)
        for t in (0.01, 1.0, 7.5):
            E = expm(A, t)
            ref = expm_eig_mp(A.matrix, t)
            scale = np.max(np.abs(ref))
            assert np.max(np.abs(E - ref)) <= 1e-9 * scale
            # scipy's double-precision kernel is limited by conditioning
            assert np.max(np.abs(E - sla.expm(t * A.matrix))) <= 1e-8 * scale


def test_expm_large_norm_uses_squaring():
    A = zoo.make_biharmonic_1d(16)
    E = expm(A, 1e-3)
    assert np.allclose(E, expm_eig(A.matrix, 1e-3), atol=1e-12)


def test_spectral_mapping():
    A = zoo.make_random_stable(6, 3)
    lam = np.array(analyze(A).eigenvalues)
    mu = np.linalg.eigvals(expm(A, 0.8))
    want = np.exp(0.8 * lam)
    for z in want:
        assert np.min(np.abs(mu - z)) <= 1e-8 * max(1.0, abs(z))


def test_expm_overflow_guard():
    with pytest.raises(OverflowRiskError):
        expm(np.array([[2.0]]), 400.0)
    assert np.isfinite(expm(np.array([[2.0]]), 300.0)).all()


def test_time_grid():
    g = TimeGrid(10.0)
    pts = g.points()
    assert pts[0] == 0.0 and pts[1] == pytest.approx(1e-3) and pts[-1] == pytest.approx(10.0)
    assert len(pts) == 65 and np.all(np.diff(pts) > 0)
    assert TimeGrid(10.0, 2.0).points()[0] == pytest.approx(2.0)
    with pytest.raises(ValueError):
        TimeGrid(1.0, 2.0)
    with pytest.raises(ValueError):
        TimeGrid(np.inf)


def test_default_t_max():
    A = zoo.make_rank_one_dominant(5, 0)
    assert default_t_max(A) == pytest.approx(50.0 / spectral_gap(A))
    assert default_t_max(np.zeros((2, 2))) == 50.0
    with config.override(t_max=3.0):
        assert default_t_max(A) == 3.0


def test_find_t0_metzler_positive_from_start():
    A = zoo.make_metzler(5, 4)
    grid = TimeGrid.for_operator(A)
    v = find_t0(A, np.random.default_rng(2).random(5) + 0.1, grid=grid)
    assert v.holds and v.t0 == 0.0
    for t in grid.points()[1:]:
        assert np.all(expm_eig(A.matrix, t) >= -1e-12)


def test_find_t0_rank_one_shows_early_negativity():
    A = zoo.make_rank_one_dominant(3, 0)
    v = find_t0(A, np.eye(3)[0])
    assert v.holds and v.t0 > 0
    assert any(eps < 0 for t, eps in v.margins if t < v.t0)
    # 10x denser oracle grid: the first entry changes sign before t0 and not after
    ts = np.linspace(0, v.t_max, 10 * 65)
    col = [expm_eig(A.matrix, t)[:, 0].min() for t in ts]
    assert dense_sign_changes(col) >= 1
    assert all(c > 0 for t, c in zip(ts, col) if t >= v.t0)


def test_find_t0_rotation_fails(rotation):
    v = find_t0(rotation, [1.0, 0.0])
    assert not v.holds and v.t0 is None
    assert any(eps < 0 for _, eps in v.margins[-20:])


def test_find_t0_uniform_examples(rotation):
    assert find_t0_uniform(zoo.make_metzler(6, 2)).holds
    assert not find_t0_uniform(rotation).holds
    A = zoo.make_rank_one_dominant(5, 2)
    v = find_t0_uniform(A)
    assert v.holds
    assert v.t0 == max(v.column_t0)
    for j in range(5):
        assert find_t0(A, np.eye(5)[j]).t0 == pytest.approx(v.column_t0[j])


def test_uniform_verdict_tail_passes():
    for seed in range(10):
        v = find_t0_uniform(zoo.make_rank_one_dominant(8, seed))
        assert v.holds
        for (t, eps), ok, thr in zip(v.margins, v.passes, v.thresholds):
            if t >= v.t0:
                assert ok and eps > thr


def test_uniform_implies_individual_with_earlier_t0():
    A = zoo.make_rank_one_dominant(5, 7)
    tu = find_t0_uniform(A)
    rng = np.random.default_rng(4)
    for _ in range(8):
        f = rng.random(5)
        v = find_t0(A, f, grid=TimeGrid.for_operator(A))
        assert v.holds and v.t0 <= tu.t0 + 1e-4 * tu.t_max


def test_find_t0_rejects_nonpositive_f(diag01):
    with pytest.raises(ValueError):
        find_t0(diag01, [1.0, -1.0])


def test_rescaled_bound_examples(diag01):
    b = rescaled_bound(diag01)
    assert b.bounded and b.sup_norm == pytest.approx(1.0)
    J = zoo.make_jordan(0.0, 2)
    b = rescaled_bound(J, TimeGrid(50.0))
    assert not b.bounded
    assert b.sup_norm == pytest.approx(51.0)
    b = rescaled_bound(zoo.make_rank_one_dominant(5, 1))
    assert b.bounded and np.isfinite(b.sup_norm)


def test_bounded_iff_peripheral_semisimple():
    for spec in zoo.default_specs(4):
        A = spec.build()
        b = rescaled_bound(A)
        orders = [m for _, m in peripheral_pole_orders(A)]
        assert b.bounded == all(m == 1 for m in orders)


def test_modulus_estimate_examples():
    M = zoo.make_metzler(4, 1)
    rng = np.random.default_rng(0)
    for _ in range(5):
        assert modulus_estimate(M, rng.standard_normal(4)) == 0.0
        assert modulus_estimate(M, rng.random(4)) == 0.0
    A = zoo.make_rank_one_dominant(3, 0)
    t1 = modulus_estimate(A, np.array([1.0, -1.0, 0.5]))
    assert t1 is not None and t1 > 0
    # f >= 0 can still have a transiently negative orbit; the estimate then
    # kicks in no later than eventual positivity of that orbit
    f = np.array([1.0, 0.0, 2.0])
    t1 = modulus_estimate(A, f)
    v = find_t0(A, f)
    pts = TimeGrid.for_operator(A).points()
    assert t1 is not None and v.holds and t1 <= pts[pts >= v.t0][0]


def test_modulus_batch_matches_single():
    A = zoo.make_rank_one_dominant(5, 3)
    F = np.random.default_rng(1).standard_normal((5, 6))
    assert modulus_batch(A, F) == [modulus_estimate(A, F[:, j]) for j in range(6)]
    with pytest.raises(ValueError):
        modulus_batch(A, np.ones((4, 2)))


def test_smoothing_check_examples():
    A = zoo.make_random_stable(3, 0)
    assert smoothing_check(A, 1.0, np.ones(3))
    assert not smoothing_check(np.zeros((2, 2)), 1.0, [1.0, 0.0])
    assert not smoothing_check(np.array([[-1.0, 0.0], [2.0, -1.0]]), 1.0, [1.0, 0.0])
    # e^{tA} is invertible, so its range never fits into a proper ideal
    rng = np.random.default_rng(8)
    for _ in range(10):
        assert not smoothing_check(rng.standard_normal((2, 2)), rng.uniform(0, 2), [1.0, 0.0])


def test_laplace_transform_consistency():
    A = zoo.make_random_stable(4, 5)
    lam = analyze(A).spectral_bound + 1.0
    ts = np.linspace(0, 60, 6001)
    vals = np.array([np.exp(-lam * t) * expm(A, t) for t in ts])
    approx = trapezoid(vals, ts, axis=0)
    R = np.linalg.inv(lam * np.eye(4) - A.matrix)
    assert np.max(np.abs(approx - R)) <= 1e-4 * max(1.0, np.max(np.abs(R)))


def test_operator_wrapping():
    assert find_t0_uniform(Operator(np.array([[-1.0]]))).holds
