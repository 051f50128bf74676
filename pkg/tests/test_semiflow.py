import math

import numpy as np
import pytest
from scipy import integrate

from pdmp_ergo.core import HybridMetric
from pdmp_ergo.errors import InputError
from pdmp_ergo.semiflow import (
    AffineSemiflow, CallablePhi, ExpSumPhi, FlowRegularityCertificate, ConstantGrowth, K_phi, OdeSemiflow,
    affine_certificate, check_A3, check_A4, divergence_sampler, flow, pair_sampler, phi_example, sup_phi,
)


def test_affine_flow_values():
    s = AffineSemiflow([-1.0], [[0.0]])
    assert flow(s, 0, math.log(2), [4.0])[0] == pytest.approx(2.0, abs=1e-14)
    np.testing.assert_array_equal(flow(s, 0, 0.0, [3.5]), [3.5])
    s1 = AffineSemiflow([-1.0], [[1.0]])
    assert flow(s1, 0, 50.0, [7.0])[0] == pytest.approx(1.0, abs=1e-9)


def test_semigroup_property(rng):
    s = AffineSemiflow([-0.7, 0.3], [[1.0], [-2.0]])
    for _ in range(20):
        i = int(rng.integers(2))
        a, b = rng.uniform(0, 3, 2)
        y = rng.normal(size=1)
        np.testing.assert_allclose(flow(s, i, a + b, y), flow(s, i, a, flow(s, i, b, y)), rtol=1e-12, atol=1e-12)


def test_flow_rejects_negative_time_and_bad_regime():
    s = AffineSemiflow([-1.0], [[0.0]])
    with pytest.raises(InputError):
        flow(s, 0, -1.0, [0.0])
    with pytest.raises(InputError):
        flow(s, 3, 1.0, [0.0])


def test_ode_flow_matches_affine():
    ode = OdeSemiflow(lambda i, y: -y, n_regimes=1, d=1)
    assert flow(ode, 0, 1.3, [2.0])[0] == pytest.approx(2.0 * math.exp(-1.3), rel=1e-6)


def test_check_A3_linear_flow_is_tight(rng):
    s = AffineSemiflow([-1.0], [[0.0]])
    cert = affine_certificate(s)
    res = check_A3(s, cert, pair_sampler(rng, -5, 5, 1, 1), 500)
    assert res.passed
    assert res.worst == pytest.approx(1.0, abs=1e-12)


def test_check_A3_understated_alpha_fails(rng):
    s = AffineSemiflow([-1.0], [[0.0]])
    bad = FlowRegularityCertificate(1.0, -2.0, ExpSumPhi(), ConstantGrowth(1.0))
    assert not check_A3(s, bad, pair_sampler(rng, -5, 5, 1, 1), 200).passed


def test_check_A4_example_flows(rng):
    s = AffineSemiflow([-1.0, -1.0], [[0.0], [1.0]])
    cert = affine_certificate(s)
    res = check_A4(s, cert, divergence_sampler(rng, -5, 5, 1, 2), 500)
    assert res.passed
    assert res.worst == pytest.approx(1.0, abs=1e-9)
    # the certificate's phi is |r| (1 - e^{alpha t})
    for t in (0.0, 0.5, 2.0):
        assert cert.phi(t) == pytest.approx(1.0 - math.exp(-t), abs=1e-14)


def test_identical_flows_have_zero_divergence(rng):
    s = AffineSemiflow([-1.0, -1.0], [[0.0], [0.0]])
    res = check_A4(s, affine_certificate(s), divergence_sampler(rng, -5, 5, 1, 2), 200)
    assert res.passed and res.worst == 0.0


@pytest.mark.parametrize(
    "phi, lam, expected",
    [
        (ExpSumPhi((0.0,), (0.0,)), 1.0, 0.0),
        (phi_example(1.0, -1.0), 1.0, 0.5),
        (CallablePhi(lambda t: t, monotone=True), 1.0, 1.0),
    ],
)
def test_K_phi(phi, lam, expected):
    cert = FlowRegularityCertificate(1.0, -1.0, phi, ConstantGrowth(1.0))
    assert K_phi(cert, lam) == pytest.approx(expected, abs=1e-8)


def test_K_phi_quadrature_matches_closed_form():
    phi = phi_example(2.0, -0.5)
    cert = FlowRegularityCertificate(1.0, -0.5, phi, ConstantGrowth(1.0))
    ref, _ = integrate.quad(lambda t: math.exp(-1.5 * t) * phi(t), 0, np.inf)
    assert K_phi(cert, 1.5) == pytest.approx(ref, rel=1e-9)
    assert K_phi(cert, 1.5, method="quad") == pytest.approx(ref, rel=1e-7)


def test_sup_phi_monotone():
    assert sup_phi(phi_example(1.0, -1.0), math.log(2)) == pytest.approx(0.5, abs=1e-12)


def test_affine_certificate_takes_largest_rate():
    cert = affine_certificate(AffineSemiflow([-1.0, -2.0], [[0.0], [0.0]]), HybridMetric(1.0))
    assert cert.alpha == -1.0 and cert.L == 1.0
