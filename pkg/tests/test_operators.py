import numpy as np
import pytest

from stochfb.catalog import L1Subdifferential, NormalCone, QuadraticGradient
from stochfb.errors import DomainError, EmptySampleError, PreconditionError
from stochfb.geometry import Box
from stochfb.operators import (
    containment_tol,
    graph_sample,
    least_norm,
    project_domain,
    resolvent,
    yosida,
)


def test_containment_tol_scales_with_norm():
    assert containment_tol(np.zeros(2)) == pytest.approx(1e-9)
    assert containment_tol(np.array([3.0, 4.0])) == pytest.approx(6e-9)


def test_resolvent_rejects_bad_gamma():
    atom = L1Subdifferential(1.0, 2)
    with pytest.raises(PreconditionError):
        resolvent(atom, 0.0, np.zeros(2))
    with pytest.raises(PreconditionError):
        resolvent(atom, -1.0, np.zeros(2))
    with pytest.raises(PreconditionError):
        resolvent(atom, 1.0, np.array([np.nan, 0.0]))


def test_yosida_identity():
    atom = QuadraticGradient([[2.0]], [1.0])
    x = np.array([3.0])
    gamma = 0.5
    j = resolvent(atom, gamma, x)
    assert np.allclose(j + gamma * yosida(atom, gamma, x), x, atol=1e-12)


def test_least_norm_inside_and_outside_domain():
    atom = NormalCone(Box([-1.0], [1.0]))
    assert np.allclose(least_norm(atom, np.array([0.5])), [0.0])
    # boundary point: least-norm element of the cone is still 0
    assert np.allclose(least_norm(atom, np.array([1.0])), [0.0])
    with pytest.raises(DomainError):
        least_norm(atom, np.array([2.0]))


def test_least_norm_l1_kink():
    atom = L1Subdifferential(2.0, 2)
    assert np.allclose(least_norm(atom, np.array([3.0, 0.0])), [2.0, 0.0])


def test_project_domain():
    atom = NormalCone(Box([-1.0, -1.0], [1.0, 1.0]))
    assert np.allclose(project_domain(atom, np.array([2.0, 0.0])), [1.0, 0.0])


def test_graph_sample_deterministic_and_in_graph():
    atom = L1Subdifferential(1.0, 2)
    pairs = graph_sample(atom, [-2, -2], [2, 2], 25, seed=42)
    again = graph_sample(atom, [-2, -2], [2, 2], 25, seed=42)
    assert len(pairs) == 25
    for (x, y), (x2, y2) in zip(pairs, again):
        assert np.array_equal(x, x2) and np.array_equal(y, y2)
        assert atom.value(x).contains(y, containment_tol(x))


def test_graph_sample_empty_region():
    atom = NormalCone(Box([10.0], [11.0]))
    with pytest.raises(EmptySampleError):
        graph_sample(atom, [-1.0], [1.0], 5, seed=0, max_tries=10)
