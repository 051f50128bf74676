"""Run configuration: TOML schema, validation and model construction.

A config names one experiment and either a built-in preset or an inline model::

    experiment = "constants"

    [model]
    preset = "gene-expression"
    overrides = { k = [1.0, 2.0] }

    [budget]
    seed = 7

Unknown keys are rejected everywhere.
"""

from __future__ import annotations

import sys
from pathlib import Path
from typing import Annotated, Any, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Discriminator, Field, Tag, ValidationError, model_validator

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .analysis import compute_constants
from .core import HybridMetric, HybridState
from .errors import ConfigError
from .jump import (
    AdditiveBurstKernel, ConstantProbs, FiniteIfsKernel, InverseDistanceProbs, JumpRegularityCertificate,
)
from .models import PRESETS, Preset, build_preset
from .pdmp import ModelSpec
from .semiflow import AffineSemiflow, affine_certificate

EXPERIMENTS = ("simulate", "couple", "fm", "check", "constants", "correspond", "full-report")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class AffineFlows(_Strict):
    type: Literal["affine"] = "affine"
    alphas: list[float]
    fixed_points: list[list[float]]


class BurstJump(_Strict):
    type: Literal["burst"]
    law: Literal["exponential", "discrete"] = "exponential"
    mean: float = 1.0
    direction: Optional[list[float]] = None
    sizes: list[float] = Field(default_factory=list)
    weights: list[float] = Field(default_factory=list)


class ProbsSpec(_Strict):
    type: Literal["constant", "inverse-distance"]
    values: Optional[list[float]] = None
    base: Optional[list[float]] = None
    amp: Optional[list[float]] = None
    center: Optional[list[float]] = None


class IfsJump(_Strict):
    type: Literal["ifs"]
    A: list[Any]
    c: list[Any]
    probs: ProbsSpec


class JumpCertSpec(_Strict):
    a_tilde: float
    b_tilde: float
    l_tilde: float = 0.0
    eta: float = 1.0


class InlineModel(_Strict):
    name: str = "custom"
    d: int = Field(ge=1)
    lam: float = Field(alias="lambda", gt=0)
    c: float = Field(gt=0)
    ystar: list[float]
    pi: list[list[float]]
    flows: AffineFlows
    jump: Annotated[Union[BurstJump, IfsJump], Field(discriminator="type")]
    jump_certificate: Optional[JumpCertSpec] = None
    metric: Literal["euclidean", "l1"] = "euclidean"
    check_box: tuple[float, float] = (-10.0, 10.0)


class PresetModel(_Strict):
    preset: Literal["gene-expression", "example-two-flows", "ifs-place-dependent"]
    overrides: dict[str, Any] = Field(default_factory=dict)


def _model_kind(v: Any) -> str:
    if isinstance(v, dict):
        return "preset-model" if "preset" in v else "inline-model"
    return "preset-model" if hasattr(v, "preset") else "inline-model"


class StartSpec(_Strict):
    y1: Optional[list[float]] = None
    i1: int = Field(0, ge=0)
    y2: Optional[list[float]] = None
    i2: Optional[int] = Field(None, ge=0)


class Budget(_Strict):
    seed: int = 0
    n_steps: int = Field(30, ge=1)
    n_samples: int = Field(10_000, ge=2)
    process_samples: int = Field(100_000, ge=2)
    T: float = Field(50.0, gt=0)
    burn_in: int = Field(200, ge=0)
    t_grid: list[float] = Field(default_factory=lambda: [float(t) for t in range(1, 21)])
    n_boot: int = Field(200, ge=1)
    check_samples: int = Field(2000, ge=1)
    lyapunov_points: int = Field(20, ge=1)
    start: StartSpec = Field(default_factory=StartSpec)


class FmInput(_Strict):
    mu: str
    nu: str
    column: str = "n"
    mu_value: float
    nu_value: float


class Output(_Strict):
    directory: str = "pdmp-ergo-out"
    formats: list[Literal["json", "csv"]] = Field(default_factory=lambda: ["json", "csv"])


class RunConfig(_Strict):
    experiment: Literal["simulate", "couple", "fm", "check", "constants", "correspond", "full-report"]
    model: Annotated[
        Union[Annotated[PresetModel, Tag("preset-model")], Annotated[InlineModel, Tag("inline-model")]],
        Discriminator(_model_kind),
    ]
    budget: Budget = Field(default_factory=Budget)
    output: Output = Field(default_factory=Output)
    fm: Optional[FmInput] = None
    workers: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def _fm_needs_inputs(self) -> RunConfig:
        if self.experiment == "fm" and self.fm is None:
            raise ValueError("experiment 'fm' needs an [fm] section with mu, nu, mu_value and nu_value")
        return self


_TAGS = ("preset-model", "inline-model", "burst", "ifs")


def _format_validation(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"] if p not in _TAGS)
        lines.append(f"{loc or '<root>'}: {e['msg']}")
    return "; ".join(lines)


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Parse and validate TOML text. Raises :class:`ConfigError` with a readable message."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: parse error: {exc}") from exc
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(f"{source}: invalid config: {_format_validation(exc)}") from exc


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return parse_config(text, str(path))


def _probs(spec: ProbsSpec, n_maps: int):
    if spec.type == "constant":
        if spec.values is None:
            raise ConfigError("constant probabilities need 'values'")
        vals = np.asarray(spec.values, dtype=np.float64)
        if vals.size != n_maps or np.any(vals < 0) or abs(vals.sum() - 1) > 1e-12:
            raise ConfigError("constant probabilities must be a probability vector with one entry per map")
        return ConstantProbs(tuple(spec.values))
    if spec.base is None or spec.amp is None:
        raise ConfigError("inverse-distance probabilities need 'base' and 'amp'")
    return InverseDistanceProbs(tuple(spec.base), tuple(spec.amp), None if spec.center is None else tuple(spec.center))


def build_model(cfg: RunConfig) -> Preset:
    """Model, certificates, derived constants and check box for a config."""
    m = cfg.model
    if isinstance(m, PresetModel):
        return build_preset(m.preset, m.overrides)
    metric = HybridMetric(m.c, m.metric)
    flows = AffineSemiflow(m.flows.alphas, m.flows.fixed_points)
    if isinstance(m.jump, BurstJump):
        direction = tuple(m.jump.direction or [1.0] + [0.0] * (m.d - 1))
        jump = AdditiveBurstKernel(m.jump.law, m.jump.mean, direction, tuple(m.jump.sizes), tuple(m.jump.weights))
        cert = m.jump_certificate or JumpCertSpec(a_tilde=1.0, b_tilde=jump.mean_displacement(metric))
    else:
        A = np.asarray(m.jump.A, dtype=np.float64)
        n_maps = A.shape[0]
        jump = FiniteIfsKernel(A, np.asarray(m.jump.c, dtype=np.float64), _probs(m.jump.probs, n_maps))
        if m.jump_certificate is None:
            raise ConfigError("an inline IFS model needs a [model.jump_certificate] section")
        cert = m.jump_certificate
    model = ModelSpec(flows, jump, np.asarray(m.pi, dtype=np.float64), m.lam, m.ystar, metric, m.name)
    if model.d != m.d:
        raise ConfigError(f"model.d = {m.d} but the flows have dimension {model.d}")
    jcert = JumpRegularityCertificate(cert.a_tilde, cert.b_tilde, cert.l_tilde, cert.eta, tuple(m.ystar))
    fcert = affine_certificate(flows, metric)
    const = compute_constants(model, fcert, jcert)
    expected = {"a": const.a, "b": const.b, "R": const.R, "t0": const.t0, "K_phi": const.K_phi,
                "M_phi": const.M_phi, "M_L": const.M_L, "c_min": const.c_min, "c": m.c}
    return Preset(model, fcert, jcert, expected, tuple(m.check_box))


def start_pair(cfg: RunConfig, model: ModelSpec) -> tuple[HybridState, HybridState]:
    """Initial pair for coupling experiments; defaults to ``(y*, 0)`` and ``(y* + 3, 1)``."""
    s = cfg.budget.start
    y1 = model.ystar if s.y1 is None else np.asarray(s.y1, dtype=np.float64)
    y2 = model.ystar + 3.0 if s.y2 is None else np.asarray(s.y2, dtype=np.float64)
    i2 = min(1, model.n_regimes - 1) if s.i2 is None else s.i2
    for i in (s.i1, i2):
        if i >= model.n_regimes:
            raise ConfigError(f"start regime {i} out of range for {model.n_regimes} regimes")
    return HybridState(y1, s.i1), HybridState(y2, i2)


__all__ = [
    "EXPERIMENTS", "RunConfig", "Budget", "Output", "InlineModel", "PresetModel", "parse_config", "load_config",
    "build_model", "start_pair", "PRESETS",
]
