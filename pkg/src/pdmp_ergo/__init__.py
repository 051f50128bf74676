"""Simulation and ergodicity diagnostics for piecewise-deterministic Markov processes.

The package simulates switching-flow processes with random jumps, builds exact
couplings of their post-jump chains, computes Fortet-Mourier distances between
empirical laws and checks the drift and contraction conditions that make the
process exponentially ergodic.
"""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    AugmentedState, EmpiricalMeasure, HybridMetric, HybridState, RngStream, hybrid_distance, lyapunov_V,
    make_rng, truncated_distance,
)
from .errors import (  # noqa: E402
    ConfigError, DomainError, HorizonError, InputError, InvariantViolation, PdmpError, SamplerExhausted, WindowError,
)
from .fm_distance import FmProblem, fm_between, fm_distance, fm_distance_oracle  # noqa: E402
from .models import PRESETS, Preset, build_preset  # noqa: E402
from .pdmp import ModelSpec, simulate_batch, simulate_chain  # noqa: E402

__all__ = [
    "__version__", "AugmentedState", "EmpiricalMeasure", "HybridMetric", "HybridState", "RngStream",
    "hybrid_distance", "lyapunov_V", "make_rng", "truncated_distance", "ConfigError", "DomainError",
    "HorizonError", "InputError", "InvariantViolation", "PdmpError", "SamplerExhausted", "WindowError",
    "FmProblem", "fm_between", "fm_distance", "fm_distance_oracle", "PRESETS", "Preset", "build_preset",
    "ModelSpec", "simulate_batch", "simulate_chain",
]
