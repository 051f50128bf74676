"""State-space types, metrics, the Lyapunov function and RNG streams.

The state space is ``X = R^d x I`` with ``I = {0, ..., n_regimes - 1}``.
Points are carried around as :class:`HybridState` values for single-sample
APIs and as ``(ys, regimes)`` array pairs, ``ys.shape == (n, d)``, for the
vectorised batch simulators.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InputError

__all__ = [
    "HybridState",
    "AugmentedState",
    "HybridMetric",
    "EmpiricalMeasure",
    "RngStream",
    "make_rng",
    "hybrid_distance",
    "truncated_distance",
    "lyapunov_V",
]

WEIGHT_TOL = 1e-12


def _as_vector(y: ArrayLike) -> NDArray[np.float64]:
    arr = np.array(y, dtype=np.float64, ndmin=1)
    if arr.ndim != 1:
        raise InputError(f"state coordinate must be a vector, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class HybridState:
    """A point ``(y, i)`` of ``X = Y x I``."""

    y: NDArray[np.float64]
    i: int

    def __post_init__(self) -> None:
        y = _as_vector(self.y)
        if y.size < 1:
            raise InputError("dimension d must be >= 1")
        if not np.all(np.isfinite(y)):
            raise InputError(f"non-finite state coordinate {y}")
        if int(self.i) != self.i or self.i < 0:
            raise InputError(f"regime index must be a nonnegative integer, got {self.i}")
        y.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "i", int(self.i))

    @property
    def d(self) -> int:
        return self.y.size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HybridState):
            return NotImplemented
        return self.i == other.i and np.array_equal(self.y, other.y)

    def __hash__(self) -> int:
        return hash((self.i, self.y.tobytes()))

    def __repr__(self) -> str:
        return f"HybridState(y={self.y.tolist()}, i={self.i})"


@dataclass(frozen=True)
class AugmentedState:
    """A hybrid state together with the cumulative jump time ``tau``."""

    x: HybridState
    tau: float = 0.0

    def __post_init__(self) -> None:
        if not (self.tau >= 0.0):
            raise InputError(f"tau must be nonnegative, got {self.tau}")


@dataclass(frozen=True)
class HybridMetric:
    """``rho_c((y1, i1), (y2, i2)) = rho_Y(y1, y2) + c * [i1 != i2]``.

    ``base`` selects ``rho_Y``: ``"euclidean"`` or ``"l1"`` (coordinate-weighted,
    ``sum_k w_k |u_k - v_k|``; unit weights when ``weights`` is None).
    """

    c: float = 1.0
    base: str = "euclidean"
    weights: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if not (self.c > 0):
            raise InputError(f"regime weight c must be positive, got {self.c}")
        if self.base not in ("euclidean", "l1"):
            raise InputError(f"unknown base metric {self.base!r}")
        if self.weights is not None:
            w = tuple(float(v) for v in self.weights)
            if self.base != "l1":
                raise InputError("coordinate weights only apply to the l1 base metric")
            if any(not (v > 0) for v in w):
                raise InputError("l1 weights must be positive")
            object.__setattr__(self, "weights", w)

    def norm(self, v: ArrayLike) -> NDArray[np.float64] | float:
        """Norm inducing ``rho_Y``, taken over the last axis."""
        v = np.asarray(v, dtype=np.float64)
        if self.base == "euclidean":
            return np.sqrt(np.sum(v * v, axis=-1))
        if self.weights is not None:
            w = np.asarray(self.weights)
            if w.size != v.shape[-1]:
                raise InputError(f"l1 weights have length {w.size}, states have d={v.shape[-1]}")
            return np.sum(w * np.abs(v), axis=-1)
        return np.sum(np.abs(v), axis=-1)

    def y_distance(self, u: ArrayLike, v: ArrayLike) -> NDArray[np.float64] | float:
        u = np.asarray(u, dtype=np.float64)
        v = np.asarray(v, dtype=np.float64)
        if u.shape[-1] != v.shape[-1]:
            raise InputError(f"dimension mismatch: {u.shape[-1]} vs {v.shape[-1]}")
        return self.norm(u - v)

    def distance(self, y1, i1, y2, i2):
        """Vectorised ``rho_c`` over batches of ``(ys, regimes)``."""
        return self.y_distance(y1, y2) + self.c * (np.asarray(i1) != np.asarray(i2))

    def truncated(self, y1, i1, y2, i2):
        return np.minimum(self.distance(y1, i1, y2, i2), 1.0)


def hybrid_distance(x1: HybridState, x2: HybridState, m: HybridMetric) -> float:
    if x1.d != x2.d:
        raise InputError(f"dimension mismatch: {x1.d} vs {x2.d}")
    return float(m.distance(x1.y, x1.i, x2.y, x2.i))


def truncated_distance(x1: HybridState, x2: HybridState, m: HybridMetric) -> float:
    return min(hybrid_distance(x1, x2, m), 1.0)


def lyapunov_V(x: HybridState, ystar: ArrayLike, metric: HybridMetric | None = None) -> float:
    """``V(y, i) = rho_Y(y, y*)``; does not depend on the regime."""
    ystar = _as_vector(ystar)
    if ystar.size != x.d:
        raise InputError(f"dimension mismatch: y has d={x.d}, y* has d={ystar.size}")
    metric = metric or HybridMetric()
    return float(metric.y_distance(x.y, ystar))


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    """Finitely supported probability measure on ``X``.

    Weights are normalised at construction. Atoms need not be distinct.
    """

    ys: NDArray[np.float64]
    regimes: NDArray[np.int64]
    weights: NDArray[np.float64] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        ys = np.array(self.ys, dtype=np.float64)
        if ys.ndim == 1:
            ys = ys[:, None]
        regimes = np.array(self.regimes, dtype=np.int64).reshape(-1)
        if ys.ndim != 2 or ys.shape[0] == 0:
            raise InputError("an empirical measure needs at least one atom")
        if regimes.shape[0] != ys.shape[0]:
            raise InputError("ys and regimes must have the same length")
        if not np.all(np.isfinite(ys)):
            raise InputError("non-finite atom coordinates")
        if self.weights is None:
            w = np.full(ys.shape[0], 1.0 / ys.shape[0])
        else:
            w = np.array(self.weights, dtype=np.float64).reshape(-1)
            if w.shape[0] != ys.shape[0]:
                raise InputError("one weight per atom required")
            if np.any(~(w > 0)):
                raise InputError("atom weights must be positive")
            w = w / w.sum()
        if abs(w.sum() - 1.0) > WEIGHT_TOL:
            w = w / w.sum()
        for arr in (ys, regimes, w):
            arr.setflags(write=False)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "regimes", regimes)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_states(
        cls, states: Sequence[HybridState], weights: ArrayLike | None = None
    ) -> EmpiricalMeasure:
        return cls(
            np.array([s.y for s in states]),
            np.array([s.i for s in states]),
            None if weights is None else np.asarray(weights),
        )

    @property
    def d(self) -> int:
        return self.ys.shape[1]

    def __len__(self) -> int:
        return self.ys.shape[0]

    @property
    def atoms(self) -> list[tuple[HybridState, float]]:
        return [(HybridState(y, int(i)), float(w)) for y, i, w in zip(self.ys, self.regimes, self.weights)]

    def resample(self, rng: np.random.Generator) -> EmpiricalMeasure:
        """Bootstrap resample with replacement (equal weights)."""
        idx = rng.choice(len(self), size=len(self), p=self.weights)
        return EmpiricalMeasure(self.ys[idx], self.regimes[idx])


def _purpose_key(purpose: str) -> int:
    # builtin hash() is salted per process; crc32 is stable
    return zlib.crc32(purpose.encode("utf-8"))


@dataclass(frozen=True)
class RngStream:
    """Deterministic random stream keyed by ``(seed, index, purpose)``.

    Identical keys give identical draw sequences; distinct keys are spawned
    through :class:`numpy.random.SeedSequence` and are independent.
    """

    seed: int
    index: int = 0
    purpose: str = "main"

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence([self.seed & 0xFFFFFFFFFFFFFFFF, self.index, _purpose_key(self.purpose)])
        return np.random.Generator(np.random.PCG64(seq))

    def child(self, index: int, purpose: str | None = None) -> RngStream:
        return RngStream(self.seed, index, purpose or self.purpose)


def make_rng(seed: int, index: int = 0, purpose: str = "main") -> np.random.Generator:
    return RngStream(seed, index, purpose).generator()
