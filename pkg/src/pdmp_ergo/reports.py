"""Serialisable report records shared by the checkers and the CLI."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

SCHEMA_VERSION = 1


class _Report(BaseModel):
    model_config = ConfigDict(populate_by_name=True, ser_json_inf_nan="constants", extra="forbid")

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2)

    @classmethod
    def from_json(cls, text: str):
        return cls.model_validate_json(text)


class CheckResult(_Report):
    """Outcome of one sampled hypothesis check.

    ``worst`` is the worst observed statistic (a ratio against the claimed
    bound, or a sampled minimum for lower-bound conditions), ``threshold`` the
    value it is compared against, ``slack`` the tolerance added to the
    threshold and ``n`` the number of samples that entered the comparison.
    """

    name: str
    passed: bool = Field(alias="pass")
    worst: float
    threshold: float
    slack: float
    n: int
    caveats: list[str] = Field(default_factory=list)
    detail: dict[str, float] = Field(default_factory=dict)


class RateEstimate(_Report):
    """Log-linear fit of a decaying mean distance.

    ``rate`` is ``q_hat = exp(slope)`` for chain fits and ``gamma_hat = -slope``
    for process fits. ``grid``/``mean``/``se`` hold the full curve; the fit
    uses the first ``n_points`` grid entries inside the window.
    """

    kind: str
    rate: float
    slope: float
    intercept: float
    r_squared: float
    n_points: int
    n_samples: int
    noise_floor: list[float]
    grid: list[float]
    mean: list[float]
    se: list[float]
    window: list[float]


class ConstantsReport(_Report):
    a: float
    b: float
    R: float
    M_L: float
    M_phi: float
    K_phi: float
    t0: float
    c_min: float
    a_tilde: float
    b_tilde: float
    L: float
    alpha: float
    lam: float = Field(alias="lambda")
    hypotheses_hold: bool
    flags: list[str] = Field(default_factory=list)
    provenance: dict[str, str] = Field(default_factory=dict)


class ChecksReport(_Report):
    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]


class DistanceWithCI(_Report):
    value: float
    ci_low: float
    ci_high: float


class CorrespondenceReport(_Report):
    """Distances between the chain and process invariant laws.

    ``self_distance_*`` are noise floors: the mean distance between two
    independent bootstrap resamples of the same empirical measure.
    """

    fm_phi_g_vs_psi: DistanceWithCI
    fm_psi_w_vs_phi: DistanceWithCI
    self_distance_phi: float
    self_distance_psi: float
    n_stat: int
    n_samples: int
    burn_in: int
    T: float
    assumptions: list[str] = Field(default_factory=list)


class RunReport(_Report):
    """Top-level JSON document written by the CLI."""

    schema_version: int = SCHEMA_VERSION
    experiment: str
    model: str
    seed: int
    constants: Optional[ConstantsReport] = None
    checks: list[CheckResult] = Field(default_factory=list)
    rates: dict[str, RateEstimate] = Field(default_factory=dict)
    correspondence: Optional[CorrespondenceReport] = None
    values: dict[str, float] = Field(default_factory=dict)
    status: str = "ok"
    messages: list[str] = Field(default_factory=list)
