import numpy as np
import pytest
from scipy import integrate, stats

from pdmp_ergo.core import HybridMetric
from pdmp_ergo.errors import ConfigError
from pdmp_ergo.jump import (
    AdditiveBurstKernel, ConstantProbs, FiniteIfsKernel, InverseDistanceProbs, JumpRegularityCertificate,
    check_jump_hypotheses, coupled_jump_mass, jump_pair_sampler, sample_coupled_jump, sample_jump,
)

from conftest import two_map_ifs


def test_ifs_support_frequencies(rng):
    k = two_map_ifs()
    n = 100_000
    out, theta = k.sample_batch(np.zeros((n, 1)), rng)
    assert set(np.unique(out[:, 0])) == {0.0, 1.0}
    freq = out[:, 0].mean()
    assert abs(freq - 0.5) < 3 * np.sqrt(0.25 / n)


def test_identity_map_and_burst_mean(rng):
    assert sample_jump(FiniteIfsKernel.identity(1), [2.5], rng)[0] == 2.5
    b = AdditiveBurstKernel("exponential", 1.0, (1.0,))
    out, _ = b.sample_batch(np.zeros((10_000, 1)), rng)
    assert out.mean() == pytest.approx(1.0, abs=0.02)
    assert np.all(out >= 0)


def test_discrete_burst_law(rng):
    b = AdditiveBurstKernel("discrete", 1.0, (1.0,), sizes=(1.0, 3.0), weights=(0.75, 0.25))
    out, _ = b.sample_batch(np.zeros((20_000, 1)), rng)
    assert set(np.unique(out)) == {1.0, 3.0}
    assert np.mean(out == 3.0) == pytest.approx(0.25, abs=0.015)
    assert b.burst_mean == pytest.approx(1.5)


def test_coupled_mass():
    k = two_map_ifs()
    assert coupled_jump_mass(k, [0.3], [0.3]) == pytest.approx(1.0)
    # p(y1) = (0.7, 0.3) and p(y2) = (0.4, 0.6): sum of minima 0.4 + 0.3
    probs = InverseDistanceProbs(base=(0.3, 0.7), amp=(0.4, -0.4))
    k2 = FiniteIfsKernel([0.5, 0.5], [0.0, 1.0], probs)
    assert coupled_jump_mass(k2, [0.0], [3.0]) == pytest.approx(0.7)
    assert coupled_jump_mass(AdditiveBurstKernel(), [0.0], [5.0]) == 1.0


def test_inverse_distance_probs_values():
    p = InverseDistanceProbs(base=(0.3, 0.7), amp=(0.4, -0.4))(np.array([[0.0], [3.0]]))
    np.testing.assert_allclose(p, [[0.7, 0.3], [0.4, 0.6]])


def test_coupled_jump_identical_inputs(rng):
    k = FiniteIfsKernel([0.5, 0.5], [0.0, 1.0], InverseDistanceProbs((0.3, 0.7), (0.4, -0.4)))
    for _ in range(50):
        out = sample_coupled_jump(k, [1.2], [1.2], rng)
        assert out.branch == "coupled"
        np.testing.assert_array_equal(out.pair[0], out.pair[1])


def test_coupled_burst_preserves_displacement(rng):
    b = AdditiveBurstKernel()
    for _ in range(50):
        out = sample_coupled_jump(b, [0.5], [2.0], rng)
        assert out.branch == "coupled"
        assert out.pair[1][0] - out.pair[0][0] == pytest.approx(1.5)


def test_coupled_branch_frequency_and_marginals(rng):
    k = FiniteIfsKernel([0.5, 0.5], [0.0, 1.0], InverseDistanceProbs((0.3, 0.7), (0.4, -0.4)))
    n = 100_000
    y1, y2 = np.zeros((n, 1)), np.full((n, 1), 2.0)
    coupled, u1, u2, t1, t2 = k.sample_coupled_batch(y1, y2, rng)
    s = coupled_jump_mass(k, [0.0], [2.0])
    assert abs(coupled.mean() - s) < 3 * np.sqrt(s * (1 - s) / n)
    assert np.all(t1[coupled] == t2[coupled])
    # each coordinate keeps its own law
    p1, p2 = k.weights(np.array([[0.0], [2.0]]))
    assert abs(np.mean(t1 == 0) - p1[0]) < 4 * np.sqrt(p1[0] * p1[1] / n)
    assert abs(np.mean(t2 == 0) - p2[0]) < 4 * np.sqrt(p2[0] * p2[1] / n)


def _quad_split(f, kink):
    lo, _ = integrate.quad(f, 0, kink) if kink > 0 else (0.0, 0.0)
    hi, _ = integrate.quad(f, max(kink, 0.0), np.inf)
    return lo + hi


def test_burst_expected_distance_exact_in_one_dimension(rng):
    b = AdditiveBurstKernel("exponential", 1.5, (1.0,))
    m = HybridMetric()
    ys = np.array([[-2.0], [-0.3], [0.0], [4.0]])
    mean, se = b.expected_distance_to(ys, [0.0], m)
    for y, val in zip(ys[:, 0], mean):
        ref = _quad_split(lambda t: abs(y + t) * np.exp(-t / 1.5) / 1.5, -y)
        assert val == pytest.approx(ref, rel=1e-9)
    assert np.all(se == 0)
    neg = AdditiveBurstKernel("exponential", 1.5, (-2.0,))
    mean_neg, _ = neg.expected_distance_to(np.array([[1.0]]), [0.0], m)
    ref = _quad_split(lambda t: abs(1.0 - 2.0 * t) * np.exp(-t / 1.5) / 1.5, 0.5)
    assert mean_neg[0] == pytest.approx(ref, rel=1e-9)


def test_burst_expected_distance_monte_carlo_in_two_dimensions(rng):
    b = AdditiveBurstKernel("exponential", 1.0, (1.0, 0.0))
    mean, se = b.expected_distance_to(np.array([[0.0, 0.0]]), [0.0, 0.0], HybridMetric(), rng, n_mc=20_000)
    assert abs(mean[0] - 1.0) < 4 * se[0]


def test_check_jump_hypotheses_constant_probs(rng):
    k = FiniteIfsKernel([0.5, 0.25], [0.0, 1.0], ConstantProbs((0.5, 0.5)))
    # only the halving map contracts by 0.375 or better, so the overlap on it is 0.5
    cert = JumpRegularityCertificate(0.375, 0.5, 0.0, 0.5, (0.0,))
    res = {c.name: c for c in check_jump_hypotheses(k, cert, jump_pair_sampler(rng, -5, 5, 1), 500)}
    assert all(c.passed for c in res.values())
    assert res["i2"].detail["a_tilde_observed"] == pytest.approx(0.375, abs=1e-12)
    assert res["i3"].detail["l_tilde_observed"] == 0.0


def test_check_jump_hypotheses_burst_isometry(rng):
    cert = JumpRegularityCertificate(1.0, 1.0, 0.0, 1.0, (0.0,))
    res = check_jump_hypotheses(AdditiveBurstKernel(), cert, jump_pair_sampler(rng, -5, 5, 1), 100)
    assert all(c.passed for c in res)
    assert res[1].worst == 1.0


def test_check_jump_hypotheses_detects_understated_l(rng, ifs):
    cert = JumpRegularityCertificate(0.5, 0.7, 0.1, 0.6, (0.0,))
    res = {c.name: c for c in check_jump_hypotheses(ifs.model.jump, cert, jump_pair_sampler(rng, -3, 3, 1), 500)}
    assert not res["i3"].passed
    assert res["i1"].passed and res["i2"].passed


def test_invalid_kernels_rejected():
    with pytest.raises(ConfigError):
        FiniteIfsKernel(np.ones((2, 1, 2)), np.zeros((2, 1)), ConstantProbs((0.5, 0.5)))
    with pytest.raises(ConfigError):
        JumpRegularityCertificate(1.0, 1.0, 0.0, 0.0, (0.0,))
    with pytest.raises(ConfigError):
        FiniteIfsKernel([0.5, 0.5], [0.0, 1.0], ConstantProbs((0.5, 0.6))).weights(np.zeros((1, 1)))


def test_ks_of_burst_sizes(rng):
    b = AdditiveBurstKernel("exponential", 2.0, (1.0,))
    out, _ = b.sample_batch(np.zeros((5000, 1)), rng)
    assert stats.kstest(out[:, 0], "expon", args=(0, 2.0)).pvalue > 0.001
