"""Built-in model presets with their regularity certificates.

``gene-expression``
    Protein level with degradation flows ``y -> exp(-k_i t) y`` and
    exponential transcriptional bursts of mean ``beta``.
``example-two-flows``
    ``S_1(t, y) = exp(alpha t) y`` and ``S_2(t, y) = exp(alpha t)(y - r) + r``
    with exponential bursts.
``ifs-place-dependent``
    Two affine flows and an iterated function system ``w_0(y) = y/2``,
    ``w_1(y) = y/2 + 1`` chosen with ``p_0(y) = 0.3 + 0.4 / (1 + |y|)``.

Each preset returns the model, a flow certificate, a jump certificate, the
derived constants and a sampling interval for the hypothesis checks.
"""

from __future__ import annotations

import math
from typing import Any, Mapping, NamedTuple

import numpy as np

from .analysis import compute_constants
from .core import HybridMetric
from .errors import ConfigError
from .jump import AdditiveBurstKernel, FiniteIfsKernel, InverseDistanceProbs, JumpRegularityCertificate
from .pdmp import ModelSpec
from .semiflow import AffineSemiflow, FlowRegularityCertificate, affine_certificate

PRESETS = ("gene-expression", "example-two-flows", "ifs-place-dependent")


class Preset(NamedTuple):
    model: ModelSpec
    flow_cert: FlowRegularityCertificate
    jump_cert: JumpRegularityCertificate
    expected: dict[str, float]
    box: tuple[float, float]  # sampling interval for hypothesis checks


_ALLOWED = {
    "gene-expression": {"k", "beta", "lam", "pi", "c"},
    "example-two-flows": {"alpha", "r", "beta", "lam", "pi", "c"},
    "ifs-place-dependent": {"lam", "pi", "c"},
}


def build_preset(name: str, overrides: Mapping[str, Any] | None = None) -> Preset:
    """Construct a preset, applying ``overrides`` to its parameters.

    ``c`` defaults to the smallest integer not below the required lower bound
    ``c_min``. Overrides that break ``a_tilde L + alpha / lambda < 1`` are
    rejected.
    """
    overrides = dict(overrides or {})
    if name not in _ALLOWED:
        raise ConfigError(f"unknown preset {name!r}; choose one of {', '.join(PRESETS)}")
    unknown = set(overrides) - _ALLOWED[name]
    if unknown:
        raise ConfigError(f"preset {name!r} does not accept overrides {sorted(unknown)}")
    builder = {"gene-expression": _gene, "example-two-flows": _two_flows, "ifs-place-dependent": _ifs}[name]
    return builder(overrides)


def _pi(overrides: Mapping[str, Any], n: int) -> np.ndarray:
    if "pi" in overrides:
        return np.asarray(overrides["pi"], dtype=np.float64)
    return np.full((n, n), 1.0 / n)


def _lam(overrides: Mapping[str, Any]) -> float:
    lam = float(overrides.get("lam", 1.0))
    if not (lam > 0):
        raise ConfigError(f"lambda must be positive, got {lam}")
    return lam


def _admissible(a_tilde: float, L: float, alpha: float, lam: float) -> None:
    lhs = a_tilde * L + alpha / lam
    if not lhs < 1:
        raise ConfigError(
            f"override violates a_tilde*L + alpha/lambda < 1: {a_tilde}*{L} + {alpha}/{lam} = {lhs:.6g}"
        )


def _finish(name, flows, jump, pi, lam, ystar, fcert, jcert, overrides, box) -> Preset:
    _admissible(jcert.a_tilde, fcert.L, fcert.alpha, lam)
    probe = ModelSpec(flows, jump, pi, lam, ystar, HybridMetric(1.0), name)
    const = compute_constants(probe, fcert, jcert)
    c = float(overrides.get("c", max(1.0, math.ceil(const.c_min - 1e-12))))
    if not (c > 0):
        raise ConfigError(f"c must be positive, got {c}")
    model = ModelSpec(flows, jump, pi, lam, ystar, HybridMetric(c), name)
    expected = {"a": const.a, "b": const.b, "R": const.R, "t0": const.t0, "K_phi": const.K_phi,
                "M_phi": const.M_phi, "M_L": const.M_L, "c_min": const.c_min, "c": c}
    return Preset(model, fcert, jcert, expected, box)


def _gene(ov: Mapping[str, Any]) -> Preset:
    k = np.atleast_1d(np.asarray(ov.get("k", (1.0, 2.0)), dtype=np.float64))
    beta = float(ov.get("beta", 1.0))
    lam = _lam(ov)
    if beta <= 0 or not math.isfinite(beta):
        raise ConfigError(f"burst mean beta must be positive, got {beta}")
    flows = AffineSemiflow(-k, np.zeros((k.size, 1)))
    jump = AdditiveBurstKernel("exponential", beta, (1.0,))
    fcert = affine_certificate(flows)
    jcert = JumpRegularityCertificate(a_tilde=1.0, b_tilde=beta, l_tilde=0.0, eta=1.0, ystar=(0.0,))
    return _finish("gene-expression", flows, jump, _pi(ov, k.size), lam, [0.0], fcert, jcert, ov, (0.0, 10.0))


def _two_flows(ov: Mapping[str, Any]) -> Preset:
    alpha = float(ov.get("alpha", -1.0))
    r = float(ov.get("r", 1.0))
    beta = float(ov.get("beta", 1.0))
    lam = _lam(ov)
    if beta <= 0 or not math.isfinite(beta):
        raise ConfigError(f"burst mean beta must be positive, got {beta}")
    flows = AffineSemiflow([alpha, alpha], [[0.0], [r]])
    jump = AdditiveBurstKernel("exponential", beta, (1.0,))
    _admissible(1.0, 1.0, alpha, lam)
    fcert = affine_certificate(flows)
    jcert = JumpRegularityCertificate(a_tilde=1.0, b_tilde=beta, l_tilde=0.0, eta=1.0, ystar=(0.0,))
    return _finish("example-two-flows", flows, jump, _pi(ov, 2), lam, [0.0], fcert, jcert, ov, (-10.0, 10.0))


def _ifs(ov: Mapping[str, Any]) -> Preset:
    lam = _lam(ov)
    flows = AffineSemiflow([-1.0, -1.0], [[0.0], [1.0]])
    probs = InverseDistanceProbs(base=(0.3, 0.7), amp=(0.4, -0.4))
    jump = FiniteIfsKernel([0.5, 0.5], [0.0, 1.0], probs)
    # i1: sum_k p_k(y) |w_k(0)| = p_1(y) <= 0.7; i2: both maps halve distances;
    # i3: sum |p(y1) - p(y2)| <= 0.8 |y1 - y2|; overlap 1 - 0.4|s1 - s2| >= 0.6
    jcert = JumpRegularityCertificate(a_tilde=0.5, b_tilde=0.7, l_tilde=0.8, eta=0.6, ystar=(0.0,))
    fcert = affine_certificate(flows)
    return _finish("ifs-place-dependent", flows, jump, _pi(ov, 2), lam, [0.0], fcert, jcert, ov, (-10.0, 10.0))


__all__ = ["PRESETS", "Preset", "build_preset"]
