import numpy as np
import pytest

from pdmp_ergo.core import (
    EmpiricalMeasure, HybridMetric, HybridState, RngStream, hybrid_distance, lyapunov_V, make_rng,
    truncated_distance,
)
from pdmp_ergo.errors import InputError


def x(y, i):
    return HybridState(np.array([y]), i)


def test_hybrid_distance_hand_values():
    assert hybrid_distance(x(2.0, 0), x(5.0, 1), HybridMetric(10.0)) == pytest.approx(13.0)
    assert hybrid_distance(x(0.0, 0), x(0.0, 1), HybridMetric(3.0)) == pytest.approx(3.0)
    assert hybrid_distance(x(1.7, 1), x(1.7, 1), HybridMetric(4.0)) == 0.0


def test_truncated_distance():
    m = HybridMetric(10.0)
    assert truncated_distance(x(2.0, 0), x(5.0, 1), m) == 1.0
    assert truncated_distance(x(0.0, 0), x(0.3, 0), m) == pytest.approx(0.3)
    assert truncated_distance(x(0.3, 0), x(0.3, 0), m) == 0.0


def test_l1_metric_and_weights():
    m = HybridMetric(1.0, "l1", (2.0, 1.0))
    a = HybridState(np.array([0.0, 0.0]), 0)
    b = HybridState(np.array([1.0, -3.0]), 0)
    assert hybrid_distance(a, b, m) == pytest.approx(5.0)


def test_metric_rejects_bad_input():
    with pytest.raises(InputError):
        HybridMetric(0.0)
    with pytest.raises(InputError):
        HybridMetric(1.0, "chebyshev")
    with pytest.raises(InputError):
        HybridState(np.array([np.nan]), 0)
    with pytest.raises(InputError):
        HybridState(np.array([0.0]), -1)


def test_lyapunov_V():
    assert lyapunov_V(x(3.0, 0), [1.0]) == pytest.approx(2.0)
    assert lyapunov_V(x(1.0, 1), [1.0]) == 0.0
    for y in np.random.default_rng(0).normal(size=10):
        assert lyapunov_V(x(y, 0), [0.0]) == lyapunov_V(x(y, 1), [0.0])


def test_empirical_measure_normalises_weights():
    mu = EmpiricalMeasure(np.array([[0.0], [1.0]]), np.array([0, 1]), np.array([1.0, 3.0]))
    np.testing.assert_allclose(mu.weights, [0.25, 0.75])
    assert len(mu) == 2 and mu.d == 1
    with pytest.raises(InputError):
        EmpiricalMeasure(np.array([[0.0]]), np.array([0]), np.array([0.0]))
    with pytest.raises(InputError):
        EmpiricalMeasure(np.zeros((0, 1)), np.zeros(0, dtype=int))


def test_resample_is_equal_weight_bootstrap():
    mu = EmpiricalMeasure(np.arange(5.0)[:, None], np.zeros(5, dtype=int))
    b = mu.resample(np.random.default_rng(1))
    assert len(b) == 5
    assert set(b.ys[:, 0]) <= set(range(5))


def test_rng_stream_determinism_and_independence():
    a = RngStream(7, 3, "x").generator().random(5)
    b = RngStream(7, 3, "x").generator().random(5)
    c = RngStream(7, 4, "x").generator().random(5)
    d = RngStream(7, 3, "y").generator().random(5)
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, c)
    assert not np.allclose(a, d)
    np.testing.assert_array_equal(make_rng(7, 3, "x").random(5), a)
    assert RngStream(7, 3, "x").child(9) == RngStream(7, 9, "x")
