"""Jump kernels ``J`` and their synchronous sub-couplings ``Q_J``.

Two families are supported:

* :class:`FiniteIfsKernel` -- finitely many affine maps ``w_k(y) = A_k y + c_k``
  chosen with place-dependent probabilities ``p_k(y)``.  ``Q_J`` puts mass
  ``min(p_k(y1), p_k(y2))`` on the pair ``(w_k(y1), w_k(y2))``.
* :class:`AdditiveBurstKernel` -- ``y -> y + theta * e`` with a state-independent
  burst law.  ``Q_J`` is the full synchronous coupling (shared ``theta``).

All samplers are vectorised over a leading batch axis and consume a fixed
number of uniforms per sample, so coupled and uncoupled streams stay aligned.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .core import HybridMetric
from .errors import ConfigError, InputError, InvariantViolation
from .reports import CheckResult
from .semiflow import RATIO_TOL, _take

PROB_TOL = 1e-12


def categorical(weights: NDArray[np.float64], u: NDArray[np.float64]) -> NDArray[np.int64]:
    """Inverse-CDF draw of one index per row of a nonnegative weight table.

    Rows need not be normalised. ``u`` holds one uniform on ``[0, 1)`` per row.
    """
    cum = np.cumsum(weights, axis=-1)
    target = u * cum[..., -1]
    idx = np.sum(cum <= target[..., None], axis=-1)
    return np.minimum(idx, weights.shape[-1] - 1)


# --- place-dependent probabilities ----------------------------------------------


@dataclass(frozen=True)
class ConstantProbs:
    probs: tuple[float, ...]

    def __call__(self, ys: NDArray) -> NDArray:
        return np.broadcast_to(np.asarray(self.probs, dtype=np.float64), (ys.shape[0], len(self.probs)))

    def lipschitz_bound(self, metric: HybridMetric) -> float:
        return 0.0


@dataclass(frozen=True)
class InverseDistanceProbs:
    """``p_k(y) = base_k + amp_k / (1 + rho_Y(y, center))``.

    Valid when ``sum(base) = 1``, ``sum(amp) = 0``, ``base >= 0`` and
    ``base + amp >= 0``; then ``sum_k |p_k(y1) - p_k(y2)| <= sum|amp| rho_Y(y1, y2)``.
    """

    base: tuple[float, ...]
    amp: tuple[float, ...]
    center: tuple[float, ...] | None = None
    metric: HybridMetric = field(default_factory=HybridMetric)

    def __post_init__(self) -> None:
        base, amp = np.asarray(self.base), np.asarray(self.amp)
        if base.shape != amp.shape:
            raise ConfigError("base and amp must have equal length")
        if abs(base.sum() - 1) > PROB_TOL or abs(amp.sum()) > PROB_TOL:
            raise ConfigError("inverse-distance probabilities need sum(base)=1 and sum(amp)=0")
        if np.any(base < 0) or np.any(base + amp < 0):
            raise ConfigError("inverse-distance probabilities would go negative")

    def __call__(self, ys: NDArray) -> NDArray:
        center = np.zeros(ys.shape[1]) if self.center is None else np.asarray(self.center, dtype=np.float64)
        s = 1.0 / (1.0 + np.asarray(self.metric.y_distance(ys, center)))
        return np.asarray(self.base)[None, :] + s[:, None] * np.asarray(self.amp)[None, :]

    def lipschitz_bound(self, metric: HybridMetric) -> float:
        return float(np.abs(self.amp).sum())


@dataclass(frozen=True)
class CallableProbs:
    func: Callable[[NDArray], NDArray]

    def __call__(self, ys: NDArray) -> NDArray:
        return np.asarray(self.func(ys), dtype=np.float64)

    def lipschitz_bound(self, metric: HybridMetric) -> float | None:
        return None


ProbFunction = Union[ConstantProbs, InverseDistanceProbs, CallableProbs]


# --- kernels --------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FiniteIfsKernel:
    """Iterated function system with finitely many affine maps."""

    A: NDArray[np.float64]
    c: NDArray[np.float64]
    probs: ProbFunction
    kind: str = field(default="ifs", init=False)

    def __post_init__(self) -> None:
        A = np.array(self.A, dtype=np.float64)
        c = np.array(self.c, dtype=np.float64)
        if A.ndim == 1:  # scalar maps in d=1
            A = A[:, None, None]
        if c.ndim == 1:
            c = c[:, None]
        if A.ndim != 3 or A.shape[1] != A.shape[2] or c.shape != A.shape[:2]:
            raise ConfigError(f"maps need A of shape (K, d, d) and c of shape (K, d); got {A.shape}, {c.shape}")
        A.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "c", c)

    @classmethod
    def identity(cls, d: int = 1) -> FiniteIfsKernel:
        return cls(np.eye(d)[None], np.zeros((1, d)), ConstantProbs((1.0,)))

    @property
    def n_maps(self) -> int:
        return self.A.shape[0]

    @property
    def d(self) -> int:
        return self.A.shape[1]

    @property
    def state_independent(self) -> bool:
        return isinstance(self.probs, ConstantProbs)

    def weights(self, ys: NDArray) -> NDArray[np.float64]:
        """``p_k(y)`` for a batch, shape ``(n, K)``; validated."""
        ys = np.atleast_2d(ys)
        p = self.probs(ys)
        if p.shape != (ys.shape[0], self.n_maps):
            raise ConfigError(f"probability function returned shape {p.shape}, expected {(ys.shape[0], self.n_maps)}")
        if np.any(p < -PROB_TOL) or np.any(np.abs(p.sum(axis=1) - 1) > PROB_TOL):
            raise ConfigError("place-dependent probabilities are not a probability vector")
        return np.clip(p, 0.0, None)

    def apply(self, theta: NDArray[np.int64], ys: NDArray) -> NDArray[np.float64]:
        return np.einsum("nij,nj->ni", self.A[theta], ys) + self.c[theta]

    def apply_all(self, ys: NDArray) -> NDArray[np.float64]:
        """Images under every map, shape ``(n, K, d)``."""
        return np.einsum("kij,nj->nki", self.A, ys) + self.c[None]

    def sample_batch(self, ys, rng):
        ys = np.atleast_2d(np.asarray(ys, dtype=np.float64))
        theta = categorical(self.weights(ys), rng.random(ys.shape[0]))
        return self.apply(theta, ys), theta

    def coupled_mass_batch(self, y1, y2) -> NDArray[np.float64]:
        return np.minimum(self.weights(y1), self.weights(y2)).sum(axis=1)

    def sample_coupled_batch(self, y1, y2, rng):
        y1 = np.atleast_2d(np.asarray(y1, dtype=np.float64))
        y2 = np.atleast_2d(np.asarray(y2, dtype=np.float64))
        n = y1.shape[0]
        u = rng.random((n, 4))
        p1, p2 = self.weights(y1), self.weights(y2)
        mn = np.minimum(p1, p2)
        s = mn.sum(axis=1)
        coupled = u[:, 0] < s
        theta_c = categorical(mn, u[:, 1])
        # residual weights are exact differences; 1 - s normalises both rows
        t1 = np.where(coupled, theta_c, categorical(np.clip(p1 - mn, 0, None), u[:, 2]))
        t2 = np.where(coupled, theta_c, categorical(np.clip(p2 - mn, 0, None), u[:, 3]))
        return coupled, self.apply(t1, y1), self.apply(t2, y2), t1, t2

    def expected_distance_to(self, ys, ystar, metric, rng=None, n_mc=0):
        """``E rho_Y(Y', y*)`` after a jump from each ``y`` (exact finite sum)."""
        ys = np.atleast_2d(ys)
        imgs = self.apply_all(ys)
        dist = np.asarray(metric.y_distance(imgs, np.asarray(ystar)[None, None, :]))
        mean = np.sum(dist * self.weights(ys), axis=1)
        return mean, np.zeros_like(mean)


@dataclass(frozen=True)
class AdditiveBurstKernel:
    """``y -> y + theta * direction`` with ``theta`` from a state-independent law.

    ``law="exponential"`` uses mean ``mean``; ``law="discrete"`` draws from
    ``sizes`` with ``weights``.
    """

    law: str = "exponential"
    mean: float = 1.0
    direction: tuple[float, ...] = (1.0,)
    sizes: tuple[float, ...] = ()
    weights: tuple[float, ...] = ()
    kind: str = field(default="burst", init=False)

    def __post_init__(self) -> None:
        if self.law == "exponential":
            if not (self.mean > 0) or not np.isfinite(self.mean):
                raise ConfigError(f"burst mean must be positive and finite, got {self.mean}")
        elif self.law == "discrete":
            w = np.asarray(self.weights, dtype=np.float64)
            if len(self.sizes) == 0 or w.shape != (len(self.sizes),) or np.any(w < 0):
                raise ConfigError("discrete burst law needs sizes and nonnegative weights of equal length")
            if abs(w.sum() - 1) > PROB_TOL:
                raise ConfigError("discrete burst weights must sum to 1")
        else:
            raise ConfigError(f"unknown burst law {self.law!r}")

    state_independent = True

    @property
    def d(self) -> int:
        return len(self.direction)

    @property
    def burst_mean(self) -> float:
        if self.law == "exponential":
            return self.mean
        return float(np.dot(self.sizes, self.weights))

    def mean_displacement(self, metric: HybridMetric) -> float:
        """``E |theta| * |e|``, the (i1) constant with ``y*`` anywhere."""
        e_norm = float(metric.norm(np.asarray(self.direction, dtype=np.float64)))
        if self.law == "exponential":
            return self.mean * e_norm
        return float(np.dot(np.abs(self.sizes), self.weights)) * e_norm

    def draw_sizes(self, u: NDArray[np.float64]) -> NDArray[np.float64]:
        if self.law == "exponential":
            return -self.mean * np.log1p(-u)
        idx = categorical(np.broadcast_to(np.asarray(self.weights), u.shape + (len(self.weights),)), u)
        return np.asarray(self.sizes, dtype=np.float64)[idx]

    def sample_batch(self, ys, rng):
        ys = np.atleast_2d(np.asarray(ys, dtype=np.float64))
        theta = self.draw_sizes(rng.random(ys.shape[0]))
        return ys + theta[:, None] * np.asarray(self.direction)[None, :], theta

    def coupled_mass_batch(self, y1, y2) -> NDArray[np.float64]:
        return np.ones(np.atleast_2d(y1).shape[0])

    def sample_coupled_batch(self, y1, y2, rng):
        y1 = np.atleast_2d(np.asarray(y1, dtype=np.float64))
        y2 = np.atleast_2d(np.asarray(y2, dtype=np.float64))
        n = y1.shape[0]
        u = rng.random((n, 4))
        theta = self.draw_sizes(u[:, 1])
        e = np.asarray(self.direction)[None, :]
        return np.ones(n, dtype=bool), y1 + theta[:, None] * e, y2 + theta[:, None] * e, theta, theta

    def expected_distance_to(self, ys, ystar, metric, rng=None, n_mc=4000):
        """``E rho_Y(y + theta e, y*)`` with standard errors.

        Exact for discrete laws and for exponential laws in one dimension
        (standard errors 0); Monte Carlo otherwise.
        """
        ys = np.atleast_2d(np.asarray(ys, dtype=np.float64))
        e = np.asarray(self.direction, dtype=np.float64)
        if self.law == "discrete":
            imgs = ys[:, None, :] + np.asarray(self.sizes)[None, :, None] * e[None, None, :]
            dist = np.asarray(metric.y_distance(imgs, np.asarray(ystar)[None, None, :]))
            mean = dist @ np.asarray(self.weights, dtype=np.float64)
            return mean, np.zeros_like(mean)
        if ys.shape[1] == 1 and e[0] != 0:
            # E|v + theta| for theta ~ Exp(mean beta): v + beta if v >= 0, else -v - beta + 2 beta exp(v / beta)
            beta = self.mean
            v = (ys[:, 0] - np.asarray(ystar, dtype=np.float64)[0]) / e[0]
            neg = np.minimum(v, 0.0)
            mean = np.where(v >= 0, v + beta, -v - beta + 2 * beta * np.exp(neg / beta))
            return float(metric.norm(e)) * mean, np.zeros(ys.shape[0])
        if rng is None:
            raise InputError("burst kernels need an rng for expected distances")
        theta = self.draw_sizes(rng.random((ys.shape[0], n_mc)))
        imgs = ys[:, None, :] + theta[..., None] * e[None, None, :]
        dist = np.asarray(metric.y_distance(imgs, np.asarray(ystar)[None, None, :]))
        return dist.mean(axis=1), dist.std(axis=1, ddof=1) / np.sqrt(n_mc)


JumpKernel = Union[FiniteIfsKernel, AdditiveBurstKernel]


@dataclass(frozen=True)
class JumpRegularityCertificate:
    """Constants claimed for a jump kernel.

    ``a_tilde``: mean contraction of synchronous maps; ``b_tilde``: bound on the
    mean displacement of ``y*``; ``l_tilde``: Lipschitz constant of the
    probabilities in total variation; ``eta``: overlap mass on contracting maps.
    """

    a_tilde: float
    b_tilde: float
    l_tilde: float
    eta: float
    ystar: tuple[float, ...]

    def __post_init__(self) -> None:
        if not (self.a_tilde > 0):
            raise ConfigError("a_tilde must be positive")
        if not (self.b_tilde >= 0):
            raise ConfigError("b_tilde must be nonnegative")
        if not (0 < self.eta <= 1):
            raise ConfigError("eta must lie in (0, 1]")
        if not (self.l_tilde >= 0):
            raise ConfigError("l_tilde must be nonnegative")


@dataclass(frozen=True)
class CoupledJumpOutcome:
    branch: str  # "coupled" | "residual"
    pair: tuple[NDArray[np.float64], NDArray[np.float64]]
    theta_used: tuple[float, float] | None = None


def _vec(y: ArrayLike) -> NDArray[np.float64]:
    y = np.array(y, dtype=np.float64, ndmin=1)
    if not np.all(np.isfinite(y)):
        raise InputError("jump input must be finite")
    return y


def sample_jump(kernel: JumpKernel, y: ArrayLike, rng: np.random.Generator) -> NDArray[np.float64]:
    y = _vec(y)
    out, _ = kernel.sample_batch(y[None, :], rng)
    return out[0]


def coupled_jump_mass(kernel: JumpKernel, y1: ArrayLike, y2: ArrayLike) -> float:
    """``s = sum_k min(p_k(y1), p_k(y2))``; 1 for state-independent laws."""
    return float(kernel.coupled_mass_batch(_vec(y1)[None, :], _vec(y2)[None, :])[0])


def sample_coupled_jump(kernel: JumpKernel, y1: ArrayLike, y2: ArrayLike, rng: np.random.Generator) -> CoupledJumpOutcome:
    """One draw from ``Q_J`` (probability ``s``) or from the independent residuals."""
    y1, y2 = _vec(y1), _vec(y2)
    coupled, u1, u2, t1, t2 = kernel.sample_coupled_batch(y1[None, :], y2[None, :], rng)
    branch = "coupled" if coupled[0] else "residual"
    if branch == "coupled" and t1[0] != t2[0]:
        raise InvariantViolation("coupled branch used different maps")
    return CoupledJumpOutcome(branch, (u1[0], u2[0]), (float(t1[0]), float(t2[0])))


# --- hypothesis checks ------------------------------------------------------------


def check_jump_hypotheses(
    kernel: JumpKernel,
    cert: JumpRegularityCertificate,
    sampler: Iterable[tuple],
    n: int,
    metric: HybridMetric | None = None,
) -> list[CheckResult]:
    """Sampled checks of the IFS conditions.

    ``sampler`` yields pairs ``(y1, y2)``. Returned checks, in order:

    * ``i1``: ``sup_y sum_k rho(w_k(y*), y*) p_k(y) <= b_tilde``;
    * ``i2``: ``sum_k rho(w_k(y1), w_k(y2)) p_k(y1) <= a_tilde rho(y1, y2)``;
    * ``i3``: ``sum_k |p_k(y1) - p_k(y2)| <= l_tilde rho(y1, y2)``;
    * ``eta``: overlap of the probabilities on maps contracting the pair by
      ``a_tilde`` is at least ``eta`` (a sampled minimum).
    """
    if n < 1:
        raise InputError("n must be >= 1")
    metric = metric or HybridMetric()
    pairs = _take(sampler, n)
    y1 = np.array([p[0] for p in pairs], dtype=np.float64).reshape(n, -1)
    y2 = np.array([p[1] for p in pairs], dtype=np.float64).reshape(n, -1)
    ystar = np.asarray(cert.ystar, dtype=np.float64)
    rho = np.asarray(metric.y_distance(y1, y2))
    keep = rho > 0
    caveat = ["suprema and infima over Y^2 are sampled, not proven"]

    if isinstance(kernel, AdditiveBurstKernel):
        b_obs = kernel.mean_displacement(metric)
        contr = np.ones(n)  # translations are isometries
        l_obs = np.zeros(n)
        overlap = np.full(n, 1.0 if cert.a_tilde >= 1 - RATIO_TOL else 0.0)
        n_b = 1
    else:
        ys = np.vstack([y1, y2])
        shift = np.asarray(metric.y_distance(kernel.apply_all(ystar[None, :])[0], ystar))
        b_vals = kernel.weights(ys) @ shift
        b_obs = float(b_vals.max())
        n_b = ys.shape[0]
        p1, p2 = kernel.weights(y1), kernel.weights(y2)
        img_d = np.asarray(metric.y_distance(kernel.apply_all(y1), kernel.apply_all(y2)))
        contr = np.zeros(n)
        contr[keep] = np.sum(img_d * p1, axis=1)[keep] / rho[keep]
        l_obs = np.zeros(n)
        l_obs[keep] = np.abs(p1 - p2).sum(axis=1)[keep] / rho[keep]
        good = img_d <= cert.a_tilde * rho[:, None] * (1 + RATIO_TOL)
        overlap = np.sum(np.minimum(p1, p2) * good, axis=1)

    worst_a = float(contr[keep].max(initial=0.0) if not isinstance(kernel, AdditiveBurstKernel) else 1.0)
    worst_l = float(l_obs.max(initial=0.0))
    min_eta = float(overlap.min())
    l_ratio = 0.0 if worst_l == 0 else (worst_l / cert.l_tilde if cert.l_tilde > 0 else np.inf)
    return [
        CheckResult(name="i1", passed=b_obs <= cert.b_tilde * (1 + RATIO_TOL) + RATIO_TOL, worst=b_obs,
                    threshold=cert.b_tilde, slack=RATIO_TOL, n=n_b, caveats=caveat),
        CheckResult(name="i2", passed=worst_a / cert.a_tilde <= 1 + RATIO_TOL, worst=worst_a / cert.a_tilde,
                    threshold=1.0, slack=RATIO_TOL, n=int(keep.sum()), caveats=caveat,
                    detail={"a_tilde_observed": worst_a}),
        CheckResult(name="i3", passed=l_ratio <= 1 + RATIO_TOL, worst=l_ratio, threshold=1.0, slack=RATIO_TOL,
                    n=int(keep.sum()), caveats=caveat, detail={"l_tilde_observed": worst_l}),
        CheckResult(name="eta", passed=min_eta >= cert.eta - RATIO_TOL, worst=min_eta, threshold=cert.eta,
                    slack=RATIO_TOL, n=n, caveats=caveat),
    ]


def jump_pair_sampler(rng: np.random.Generator, low, high, d: int):
    """Endless ``(y1, y2)`` pairs uniform on a box."""
    low = np.broadcast_to(np.asarray(low, dtype=np.float64), (d,))
    high = np.broadcast_to(np.asarray(high, dtype=np.float64), (d,))
    while True:
        yield rng.uniform(low, high), rng.uniform(low, high)
