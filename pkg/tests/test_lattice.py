import numpy as np
import pytest

from evpos import config
from evpos.errors import LatticeError
from evpos.lattice import (
    ConeNorm,
    OrderUnit,
    as_order_unit,
    column_margins,
    decompose,
    dist_to_cone,
    gauge_norm,
    ideal_contains_range,
    in_principal_ideal,
    is_positive,
    is_strongly_positive,
    strong_pos_margin,
)
from oracles import cone_distance_qp, gauge_bisection, margin_sweep


def test_decompose_examples():
    pos, neg, mod = decompose([3.0, -2.0])
    assert pos.tolist() == [3.0, 0.0]
    assert neg.tolist() == [0.0, 2.0]
    assert mod.tolist() == [3.0, 2.0]
    g = np.array([1.0, 0.0, 4.0])
    assert [x.tolist() for x in decompose(g)] == [g.tolist(), [0.0] * 3, g.tolist()]
    assert [x.tolist() for x in decompose(-g)] == [[0.0] * 3, g.tolist(), g.tolist()]


def test_order_unit_validation():
    with pytest.raises(LatticeError):
        OrderUnit([1.0, 0.0])
    with pytest.raises(LatticeError):
        OrderUnit([[1.0]])
    with pytest.raises(LatticeError):
        OrderUnit([1.0, np.nan])
    with pytest.raises(LatticeError):
        as_order_unit([1.0, 2.0], n=3)
    assert as_order_unit(None, 3) == OrderUnit.ones(3)


def test_gauge_norm_examples():
    u = np.array([1.0, 2.0, 0.5])
    assert gauge_norm(u, u) == 1.0
    assert gauge_norm(np.zeros(3), u) == 0.0
    assert gauge_norm([2.0, 2.0], [1.0, 2.0]) == 2.0
    assert gauge_norm([2.0, 2.0], [1.0, 2.0]) == pytest.approx(gauge_bisection(np.array([2.0, 2.0]), np.array([1.0, 2.0])), abs=1e-14)


def test_gauge_norm_matches_bisection_on_random_vectors():
    rng = np.random.default_rng(3)
    for _ in range(50):
        f = rng.standard_normal(6)
        u = rng.uniform(0.1, 2.0, 6)
        c = gauge_norm(f, u)
        assert c == pytest.approx(gauge_bisection(f, u), rel=1e-12)
        assert np.all(np.abs(f) <= c * u * (1 + 1e-15))


def test_principal_ideal_examples():
    assert in_principal_ideal([5.0, -3.0], [1.0, 1.0])
    assert in_principal_ideal([5.0, 0.0], [1.0, 0.0])
    assert not in_principal_ideal([5.0, 1.0], [1.0, 0.0])
    with pytest.raises(LatticeError):
        in_principal_ideal([1.0], [-1.0])


def test_strong_pos_margin_examples():
    u = np.array([1.0, 1.0])
    assert strong_pos_margin(u, u) == 1.0
    assert strong_pos_margin([1.0, 0.0], u) == 0.0
    assert not is_strongly_positive([1.0, 0.0], u)
    assert strong_pos_margin([2.0, 3.0], u) == 2.0
    assert margin_sweep(np.array([2.0, 3.0]), u) == pytest.approx(2.0, abs=1e-4)
    assert strong_pos_margin([1.0, -2.0], u) == -2.0


def test_strong_positivity_threshold_is_relative():
    f = np.array([1e6, 1e-4])
    assert strong_pos_margin(f, [1.0, 1.0]) == 1e-4
    # 1e-9 * (1 + 1e6) = 1e-3 > 1e-4
    assert not is_strongly_positive(f, [1.0, 1.0])
    with config.override(tol_pos=1e-12):
        assert is_strongly_positive(f, [1.0, 1.0])


def test_is_positive_uses_noise_floor():
    assert is_positive([1.0, -1e-14])
    assert not is_positive([1.0, -1e-6])


def test_dist_to_cone_examples():
    assert dist_to_cone([1.0, 2.0]) == 0.0
    g = np.array([-1.0, 2.0])
    assert dist_to_cone(g, ConeNorm.euclidean()) == pytest.approx(1.0, abs=1e-14)
    assert cone_distance_qp(g) == pytest.approx(1.0, abs=1e-6)
    u = np.array([0.5, 2.0, 1.0])
    assert dist_to_cone(-u, ConeNorm("u-sup", u=u)) == 1.0


def test_dist_to_cone_matches_projection_oracle():
    rng = np.random.default_rng(11)
    for _ in range(20):
        g = rng.standard_normal(5)
        assert dist_to_cone(g, ConeNorm.euclidean()) == pytest.approx(cone_distance_qp(g), abs=1e-6)


def test_cone_norm_validation_and_columns():
    with pytest.raises(LatticeError):
        ConeNorm("max")
    with pytest.raises(LatticeError):
        ConeNorm("p", p=0.5)
    with pytest.raises(LatticeError):
        ConeNorm("u-sup")
    X = np.array([[1.0, -3.0], [2.0, 0.5]])
    for norm in (ConeNorm(), ConeNorm("p", 1.0), ConeNorm("u-sup", u=[1.0, 4.0])):
        assert norm.columns(X) == pytest.approx([norm(X[:, 0]), norm(X[:, 1])])


def test_ideal_contains_range_examples():
    assert ideal_contains_range(np.random.default_rng(0).standard_normal((3, 3)), np.ones(3))
    assert not ideal_contains_range(np.eye(2), [1.0, 0.0])
    assert ideal_contains_range(np.array([[2.0, 0.0], [0.0, 0.0]]), [1.0, 0.0])
    with pytest.raises(LatticeError):
        ideal_contains_range(np.ones((2, 3)), [1.0, 1.0])


def test_column_margins_modes():
    G = np.array([[1.0, 0.0], [2.0, 3.0]])
    u = OrderUnit([1.0, 2.0])
    eps, thr, ok = column_margins(G, u, strict=True)
    assert eps.tolist() == [1.0, 0.0]
    assert ok.tolist() == [True, False]
    eps, thr, ok = column_margins(G, u, strict=False)
    assert ok.tolist() == [True, True]
    assert np.all(thr < 0)
