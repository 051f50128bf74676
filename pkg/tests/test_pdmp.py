import math

import numpy as np
import pytest
from scipy import stats

from pdmp_ergo.core import AugmentedState, EmpiricalMeasure, HybridMetric, HybridState
from pdmp_ergo.errors import ConfigError, HorizonError, InputError
from pdmp_ergo.fm_distance import fm_between
from pdmp_ergo.jump import FiniteIfsKernel
from pdmp_ergo.pdmp import (
    ModelSpec, apply_G, apply_G_batch, apply_W_batch, process_at, read_trajectories_csv, simulate_batch,
    simulate_chain, simulate_chain_from, slice_measure, step_batch, step_chain, write_trajectories_csv,
)
from pdmp_ergo.semiflow import AffineSemiflow

from conftest import burst_model, linear_identity_model


def x(y, i=0):
    return HybridState(np.array([y]), i)


def test_holding_times_are_exponential(rng):
    model = burst_model()
    batch = simulate_chain_from(model, x(0.0), 100, 1000, rng)
    dtau = np.diff(batch.taus, axis=1).ravel()
    assert dtau.mean() == pytest.approx(1.0, abs=0.02)
    assert stats.kstest(dtau[:20_000], "expon").pvalue > 0.001


def test_identity_jump_conditional_mean(rng):
    model = linear_identity_model()
    y, i, _ = step_batch(model, np.full((100_000, 1), 3.0), np.zeros(100_000, dtype=int), rng)
    # E[e^{-h}] = lambda / (lambda + 1) = 1/2
    assert y.mean() == pytest.approx(1.5, abs=0.02)
    assert np.all(i == 0)


def test_identity_switching_never_changes_regime(rng):
    model = burst_model(pi=np.eye(2))
    batch = simulate_chain_from(model, x(1.0, 1), 50, 40, rng)
    assert np.all(batch.regimes == 1)


def test_step_chain_advances_clock(rng):
    s = step_chain(burst_model(), AugmentedState(x(1.0), 2.0), rng)
    assert s.tau > 2.0 and s.x.y[0] >= 0


def test_simulate_chain_edge_cases(rng):
    model = burst_model()
    tr = simulate_chain(model, x(2.0), 0, rng)
    assert len(tr) == 1 and tr.jump_times == [0.0]
    np.testing.assert_array_equal(tr.states[0].y, [2.0])
    with pytest.raises(InputError):
        simulate_chain(model, x(2.0, 5), 3, rng)
    with pytest.raises(InputError):
        simulate_chain(model, x(2.0), -1, rng)


def test_law_of_large_numbers_for_jump_times(rng):
    tr = simulate_chain(burst_model(lam=2.0), x(0.0), 10_000, rng)
    assert tr.taus[-1] / 10_000 == pytest.approx(0.5, rel=0.05)


def test_seeded_runs_are_bit_identical():
    model = burst_model()
    a = simulate_chain(model, x(0.5), 100, np.random.default_rng(3))
    b = simulate_chain(model, x(0.5), 100, np.random.default_rng(3))
    np.testing.assert_array_equal(a.ys, b.ys)
    np.testing.assert_array_equal(a.taus, b.taus)


def test_process_interpolation(rng):
    model = ModelSpec(AffineSemiflow([-1.0, -0.5], [[1.0], [0.0]]), FiniteIfsKernel.identity(1),
                      np.full((2, 2), 0.5), 1.0, [0.0], HybridMetric(1.0))
    tr = simulate_chain(model, x(4.0), 20, rng)
    for n in (0, 3, 7):
        s = process_at(model, tr, tr.taus[n])
        np.testing.assert_array_equal(s.y, tr.ys[n])
        assert s.i == tr.regimes[n]
    t = 0.5 * tr.taus[1]
    assert process_at(model, tr, t).y[0] == pytest.approx(math.exp(-t) * 3.0 + 1.0, rel=1e-13)
    with pytest.raises(HorizonError):
        process_at(model, tr, tr.taus[-1])


def test_apply_G_mean_and_regime(rng):
    model = linear_identity_model()
    ys, regs = apply_G_batch(model, np.ones((100_000, 1)), np.zeros(100_000, dtype=int), rng)
    assert ys.mean() == pytest.approx(0.5, abs=0.02)
    assert np.all(regs == 0)
    frozen = ModelSpec(AffineSemiflow([0.0], [[0.0]]), FiniteIfsKernel.identity(1), np.eye(1), 1.0, [0.0],
                       HybridMetric(1.0))
    assert apply_G(frozen, x(2.5), rng).y[0] == 2.5


def test_apply_W_switching_frequencies(rng):
    pi = np.array([[0.2, 0.8], [0.6, 0.4]])
    model = burst_model(pi=pi)
    n = 50_000
    _, regs = apply_W_batch(model, np.zeros((n, 1)), np.zeros(n, dtype=int), rng)
    assert abs(np.mean(regs == 1) - 0.8) < 3 * np.sqrt(0.16 / n)
    ident = ModelSpec(AffineSemiflow([-1.0], [[0.0]]), FiniteIfsKernel.identity(1), np.eye(1), 1.0, [0.0],
                      HybridMetric(1.0))
    ys, regs = apply_W_batch(ident, np.full((5, 1), 1.5), np.zeros(5, dtype=int), rng)
    np.testing.assert_array_equal(ys, 1.5)


def test_flow_then_jump_matches_one_chain_step(rng):
    model = burst_model(c=3.0)
    n = 10_000
    y0, i0 = np.full((n, 1), 2.0), np.zeros(n, dtype=int)
    gy, gi = apply_G_batch(model, y0, i0, rng)
    wy, wi = apply_W_batch(model, gy, gi, rng)
    py, pi_, _ = step_batch(model, y0, i0, rng)
    d = fm_between(EmpiricalMeasure(wy, wi), EmpiricalMeasure(py, pi_), model.metric)
    assert d <= 0.05


def test_model_validation():
    flows = AffineSemiflow([-1.0], [[0.0]])
    with pytest.raises(ConfigError):
        ModelSpec(flows, FiniteIfsKernel.identity(1), np.array([[0.5]]), 1.0, [0.0], HybridMetric())
    with pytest.raises(ConfigError):
        ModelSpec(flows, FiniteIfsKernel.identity(1), np.eye(1), -1.0, [0.0], HybridMetric())
    with pytest.raises(ConfigError):
        ModelSpec(flows, FiniteIfsKernel.identity(2), np.eye(1), 1.0, [0.0], HybridMetric())


def test_trajectory_csv_round_trip(tmp_path, rng):
    batch = simulate_batch(burst_model(), np.array([[0.3], [1.0]]), np.array([0, 1]), 4, rng)
    path = tmp_path / "t.csv"
    write_trajectories_csv(path, batch)
    cols = read_trajectories_csv(path)
    ys, regs = slice_measure(cols, "n", 4)
    np.testing.assert_array_equal(ys, batch.ys[:, 4])
    np.testing.assert_array_equal(regs, batch.regimes[:, 4])
    with pytest.raises(InputError):
        slice_measure(cols, "n", 99)
