import numpy as np
import pytest

from stochfb.values import (
    BoxSet,
    OffsetSet,
    RaySet,
    SingletonSet,
    SubspaceSet,
    minkowski_distance,
)


def test_singleton_ops():
    s = SingletonSet([1.0, 2.0])
    assert np.allclose(s.project([0.0, 0.0]), [1.0, 2.0])
    assert s.distance([1.0, 2.0]) == 0.0
    assert np.allclose(s.least_norm(), [1.0, 2.0])
    assert np.allclose(s.scale(2.0).least_norm(), [2.0, 4.0])


def test_box_set_least_norm():
    b = BoxSet([-2.0, 1.0], [3.0, 4.0])
    assert np.allclose(b.least_norm(), [0.0, 1.0])
    assert np.allclose(b.project([5.0, 0.0]), [3.0, 1.0])
    assert b.contains(np.array([0.0, 2.0]), 1e-12)


def test_ray_projection():
    r = RaySet([1.0, 0.0])
    assert np.allclose(r.project([3.0, 4.0]), [3.0, 0.0])
    assert np.allclose(r.project([-3.0, 4.0]), [0.0, 0.0])
    assert np.allclose(r.least_norm(), [0.0, 0.0])


def test_subspace_projection():
    p = np.array([[1.0, 0.0], [0.0, 0.0]])
    s = SubspaceSet(p)
    assert np.allclose(s.project([2.0, 5.0]), [2.0, 0.0])


def test_offset_shifts_inner():
    s = OffsetSet(BoxSet([-1.0], [1.0]), [10.0])
    assert np.allclose(s.least_norm(), [9.0])
    assert np.allclose(s.project([10.5]), [10.5])


def test_minkowski_distance_singletons():
    # 0.5*(2,0) + 0.5*(0,2) = (1,1): distance from 0 is sqrt(2), exact
    sets = [SingletonSet([2.0, 0.0]), SingletonSet([0.0, 2.0])]
    d, sels = minkowski_distance(sets, np.array([0.5, 0.5]), np.zeros(2))
    assert d == pytest.approx(np.sqrt(2.0), abs=1e-9)
    assert np.allclose(sels[0], [2.0, 0.0])


def test_minkowski_distance_box_cancels_singleton():
    # box [-1,1] can cancel the weighted singleton exactly
    sets = [SingletonSet([0.5]), BoxSet([-1.0], [1.0])]
    d, sels = minkowski_distance(sets, np.array([1.0, 1.0]), np.zeros(1))
    assert d == pytest.approx(0.0, abs=1e-8)
    assert np.allclose(sels[0] + sels[1], 0.0, atol=1e-7)


def test_minkowski_distance_infeasible_gap():
    # 1*{3} + 1*[-1,1]: closest reachable point to 0 is 2
    sets = [SingletonSet([3.0]), BoxSet([-1.0], [1.0])]
    d, _ = minkowski_distance(sets, np.array([1.0, 1.0]), np.zeros(1))
    assert d == pytest.approx(2.0, abs=1e-8)
