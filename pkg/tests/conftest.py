import numpy as np
import pytest

from pdmp_ergo.core import HybridMetric
from pdmp_ergo.jump import AdditiveBurstKernel, ConstantProbs, FiniteIfsKernel
from pdmp_ergo.models import build_preset
from pdmp_ergo.pdmp import ModelSpec
from pdmp_ergo.semiflow import AffineSemiflow


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def gene():
    return build_preset("gene-expression")


@pytest.fixture(scope="session")
def two_flows():
    return build_preset("example-two-flows")


@pytest.fixture(scope="session")
def ifs():
    return build_preset("ifs-place-dependent")


def linear_identity_model(alpha=-1.0, lam=1.0):
    """Single affine flow towards 0 with the identity jump and no switching."""
    flows = AffineSemiflow([alpha], [[0.0]])
    return ModelSpec(flows, FiniteIfsKernel.identity(1), np.eye(1), lam, [0.0], HybridMetric(1.0))


def burst_model(alphas=(-1.0, -2.0), pi=None, lam=1.0, c=1.0):
    n = len(alphas)
    pi = np.full((n, n), 1.0 / n) if pi is None else np.asarray(pi)
    flows = AffineSemiflow(list(alphas), np.zeros((n, 1)))
    return ModelSpec(flows, AdditiveBurstKernel("exponential", 1.0, (1.0,)), pi, lam, [0.0], HybridMetric(c))


def two_map_ifs(probs=(0.5, 0.5)):
    return FiniteIfsKernel([0.5, 0.5], [0.0, 1.0], ConstantProbs(tuple(probs)))


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
