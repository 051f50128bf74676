import math

import numpy as np
import pytest

from pdmp_ergo.analysis import (
    check_A1, check_A2_A5, check_A6, compute_constants, escape_integrals, estimate_chain_contraction,
    estimate_process_decay, fit_decay, invariant_correspondence_test, lyapunov_check, lyapunov_test_points,
    run_checks, stationary_mean, stationary_process_sample, stationary_regime_law, t0_of,
)
from pdmp_ergo.core import HybridMetric, HybridState
from pdmp_ergo.errors import DomainError, InputError, WindowError
from pdmp_ergo.jump import AdditiveBurstKernel, JumpRegularityCertificate, jump_pair_sampler
from pdmp_ergo.pdmp import ModelSpec
from pdmp_ergo.semiflow import AffineSemiflow, ConstantGrowth, ExpSumPhi, FlowRegularityCertificate

from conftest import burst_model, linear_identity_model


def x(y, i=0):
    return HybridState(np.array([y]), i)


def identity_certs(alpha=-1.0, a_tilde=1.0):
    fc = FlowRegularityCertificate(1.0, alpha, ExpSumPhi(), ConstantGrowth(1.0))
    jc = JumpRegularityCertificate(a_tilde, 0.0, 0.0, 1.0, (0.0,))
    return fc, jc


def test_constants_hand_values():
    model = linear_identity_model()
    fc, jc = identity_certs(a_tilde=0.5)
    c = compute_constants(model, fc, jc)
    assert c.a == pytest.approx(0.25, abs=1e-12)
    assert c.t0 == pytest.approx(math.log(2), abs=1e-12)
    assert c.b == 0.0 and c.R == 0.0
    # phi = 0 gives K_phi = M_phi = 0, so c_min = 1
    assert c.c_min == pytest.approx(1.0, abs=1e-12)
    assert c.hypotheses_hold


def test_t0_limits():
    assert t0_of(0.0, 2.0) == 0.5
    assert t0_of(-1.0, 1.0) == pytest.approx(math.log(2), abs=1e-15)
    for s in (1e-6, -1e-6):
        assert abs(t0_of(s, 1.0) - 1.0) <= 1e-5


def test_constants_domain_errors():
    model = linear_identity_model(alpha=2.0)
    fc, jc = identity_certs(alpha=2.0)
    with pytest.raises(DomainError):
        compute_constants(model, fc, jc)


def test_constants_flag_when_a_not_below_one():
    model = linear_identity_model(alpha=0.5)
    fc, jc = identity_certs(alpha=0.5)
    c = compute_constants(model, fc, jc)
    assert not c.hypotheses_hold and c.a == pytest.approx(2.0)
    assert math.isinf(c.c_min)


def test_escape_integral_closed_form():
    model = ModelSpec(AffineSemiflow([-1.0, -2.0], [[1.0], [3.0]]), AdditiveBurstKernel(), np.full((2, 2), 0.5),
                      1.0, [0.0], HybridMetric())
    ints, how = escape_integrals(model)
    # int e^{-t} |r| (1 - e^{alpha t}) dt = |r| (1 - 1/(1 - alpha))
    np.testing.assert_allclose(ints, [0.5, 3.0 * (1 - 1 / 3)], rtol=1e-12)


def test_A2_A5_examples():
    a2, a5 = check_A2_A5(burst_model())
    assert a2.passed and a5.passed and a5.worst == 0.5
    assert a5.detail["j0"] in (0.0, 1.0)
    _, a5 = check_A2_A5(burst_model(pi=np.eye(2)))
    assert not a5.passed


def test_A1_exact_for_bursts(gene, rng):
    res = check_A1(gene.model, gene.jump_cert, (y for y, _ in jump_pair_sampler(rng, 0, 10, 1)), 500)
    assert res.passed and res.caveats == []
    bad = JumpRegularityCertificate(1.0, 0.9, 0.0, 1.0, (0.0,))
    assert not check_A1(gene.model, bad, (y for y, _ in jump_pair_sampler(rng, 0, 10, 1)), 500).passed


def test_A6_for_ifs(ifs, rng):
    res = check_A6(ifs.model, ifs.jump_cert, jump_pair_sampler(rng, -10, 10, 1), 1000)
    assert res.passed
    bad = JumpRegularityCertificate(0.5, 0.7, 0.8, 1.0, (0.0,))
    assert not check_A6(ifs.model, bad, jump_pair_sampler(rng, -10, 10, 1), 1000).passed


@pytest.mark.parametrize("name", ["gene", "two_flows", "ifs"])
def test_presets_pass_all_checks(request, name):
    p = request.getfixturevalue(name)
    rep = run_checks(p.model, p.flow_cert, p.jump_cert, p.box, seed=1, n=1000)
    assert rep.passed, rep.failed()
    assert [c.name for c in rep.checks] == ["A1", "A2", "A3", "A4", "A5", "A6", "i1", "i2", "i3", "eta"]


def test_lyapunov_identity_jump_example(rng):
    model = linear_identity_model()
    fc, jc = identity_certs()
    const = compute_constants(model, fc, jc)
    assert const.a == 0.5 and const.b == 0.0
    res = lyapunov_check(model, const, [x(4.0), x(0.0)], 20_000, rng)
    assert res.passed
    assert not lyapunov_check(model, const, [x(4.0)], 20_000, rng, a=0.25).passed


def test_lyapunov_test_points_cover_box(gene):
    pts = lyapunov_test_points(gene.model, gene.box, 20)
    assert len(pts) == 20 and pts[0].y[0] == 0.0 and pts[-1].y[0] == 10.0
    assert {p.i for p in pts} == {0, 1}


def test_fit_decay_recovers_geometric_rate(rng):
    grid = np.arange(1, 11)
    samples = 0.8**grid[None, :] * rng.exponential(size=(5000, 1))
    est = fit_decay(grid, samples, "chain")
    assert est.rate == pytest.approx(0.8, rel=1e-10)
    assert est.r_squared == pytest.approx(1.0)
    proc = fit_decay(grid.astype(float), samples, "process")
    assert proc.rate == pytest.approx(-math.log(0.8), rel=1e-10)


def test_fit_decay_window_errors(rng):
    with pytest.raises(WindowError):
        fit_decay(np.arange(1, 11), np.zeros((100, 10)), "chain")
    noisy = rng.random((50, 10)) * (0.5 ** np.arange(10)) ** 3
    with pytest.raises(WindowError):
        fit_decay(np.arange(1, 11), noisy, "chain")


def test_identical_start_raises_window_error(gene, rng):
    with pytest.raises(WindowError):
        estimate_chain_contraction(gene.model, x(1.0), x(1.0), 10, 200, rng)


def test_synchronous_contraction_matches_drift_factor(rng):
    """One regime, shared bursts: rho_n = rho_0 prod e^{-h_k}, mean factor lam / (lam - alpha)."""
    model = burst_model(alphas=(-1.0,), pi=[[1.0]])
    est = estimate_chain_contraction(model, x(0.0), x(0.9), 10, 10_000, rng)
    assert est.rate == pytest.approx(0.5, rel=0.1)


def test_gene_chain_contraction_raw_and_identified(gene):
    raw = estimate_chain_contraction(gene.model, x(0.0), x(3.0, 1), 30, 10_000, np.random.default_rng(1))
    ident = estimate_chain_contraction(gene.model, x(0.0), x(3.0, 1), 30, 10_000, np.random.default_rng(1),
                                       identify=True)
    assert 0 < raw.rate < 1 and 0 < ident.rate < 1


@pytest.mark.parametrize("identify", [True, False])
def test_process_decay_positive(gene, identify):
    est = estimate_process_decay(gene.model, x(0.0), x(3.0, 1), np.arange(1.0, 21.0), 100_000,
                                 np.random.default_rng(2), identify=identify)
    assert est.rate > 0 and est.n_points >= 5


def test_stationary_regime_law_and_mean(gene):
    np.testing.assert_allclose(stationary_regime_law(np.array([[0.9, 0.1], [0.3, 0.7]])), [0.75, 0.25])
    assert stationary_mean(gene.model)[0] == pytest.approx(5 / 7, rel=1e-12)
    single = burst_model(alphas=(-2.0,), pi=[[1.0]], lam=3.0)
    assert stationary_mean(single)[0] == pytest.approx(1.5, rel=1e-12)
    with pytest.raises(InputError):
        stationary_mean(linear_identity_model())


def test_simulated_stationary_mean_matches_moments(gene):
    mu = stationary_process_sample(gene.model, x(0.0), 30.0, 20_000, np.random.default_rng(3))
    m = mu.ys[:, 0].mean()
    se = mu.ys[:, 0].std() / math.sqrt(len(mu))
    assert abs(m - 5 / 7) < 4 * se


def test_correspondence_small_budget(two_flows):
    rep = invariant_correspondence_test(two_flows.model, burn_in=100, n_stat=2000, T=30.0, n_samples=2000, seed=4,
                                        n_boot=20)
    assert rep.fm_phi_g_vs_psi.value <= 0.1 and rep.fm_psi_w_vs_phi.value <= 0.1
    assert rep.fm_phi_g_vs_psi.ci_low <= rep.fm_phi_g_vs_psi.ci_high
    assert rep.self_distance_phi > 0 and rep.assumptions
