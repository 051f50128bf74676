"""Deterministic inter-jump dynamics and numeric checks of flow regularity.

Two kinds of semiflow family are provided:

* :class:`AffineSemiflow` -- ``S_i(t, y) = exp(alpha_i t) (y - r_i) + r_i``,
  evaluated in closed form;
* :class:`OdeSemiflow` -- a user vector field integrated with fixed-step RK4.

The checks in this module are sampling-based falsifiers: they report the worst
observed ratio against a claimed bound over a finite sample, never a proof.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Protocol, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import integrate, optimize
from scipy.stats import qmc

from .core import HybridMetric
from .errors import DomainError, InputError, SamplerExhausted
from .reports import CheckResult

RATIO_TOL = 1e-9
TOL_SEMIGROUP = 1e-8
KPHI_RTOL = 1e-10


class Semiflow(Protocol):
    kind: str
    n_regimes: int
    d: int

    def flow_batch(self, regimes: NDArray, t: NDArray, ys: NDArray) -> NDArray: ...


@dataclass(frozen=True, eq=False)
class AffineSemiflow:
    """Componentwise affine flows ``exp(alpha_i t) (y - r_i) + r_i``."""

    alphas: NDArray[np.float64]
    fixed_points: NDArray[np.float64]
    kind: str = field(default="affine-contraction", init=False)

    def __post_init__(self) -> None:
        alphas = np.array(self.alphas, dtype=np.float64).reshape(-1)
        r = np.array(self.fixed_points, dtype=np.float64)
        if r.ndim == 1:
            r = r[:, None]
        if r.shape[0] != alphas.shape[0]:
            raise InputError("one fixed point per regime required")
        alphas.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "fixed_points", r)

    @property
    def n_regimes(self) -> int:
        return self.alphas.shape[0]

    @property
    def d(self) -> int:
        return self.fixed_points.shape[1]

    def flow_batch(self, regimes, t, ys):
        regimes = np.asarray(regimes)
        t = np.asarray(t, dtype=np.float64)
        ys = np.asarray(ys, dtype=np.float64)
        r = self.fixed_points[regimes]
        decay = np.exp(self.alphas[regimes] * t)[..., None]
        out = decay * (ys - r) + r
        # keep S_i(0, y) = y bit-exact
        return np.where((t == 0)[..., None], ys, out)


@dataclass(frozen=True, eq=False)
class OdeSemiflow:
    """Flows of ``dy/dt = field(i, y)`` integrated with fixed-step RK4.

    ``vector_field(regimes, ys)`` receives a regime array of shape ``(n,)`` and
    states of shape ``(n, d)`` and must return an array of shape ``(n, d)``.
    Each sample uses ``ceil(t / h_int)`` equal sub-steps.
    """

    vector_field: Callable[[NDArray, NDArray], NDArray]
    n_regimes: int
    d: int
    h_int: float = 1e-3
    kind: str = field(default="integrated-ode", init=False)

    def __post_init__(self) -> None:
        if not (self.h_int > 0):
            raise InputError("h_int must be positive")

    def flow_batch(self, regimes, t, ys):
        regimes = np.atleast_1d(np.asarray(regimes))
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        y = np.array(ys, dtype=np.float64, ndmin=2)
        n_sub = np.ceil(t / self.h_int).astype(np.int64)
        dt = np.divide(t, n_sub, out=np.zeros_like(t), where=n_sub > 0)[:, None]
        f = self.vector_field
        for k in range(int(n_sub.max(initial=0))):
            act = n_sub > k
            yi, ri, hi = y[act], regimes[act], dt[act]
            k1 = f(ri, yi)
            k2 = f(ri, yi + 0.5 * hi * k1)
            k3 = f(ri, yi + 0.5 * hi * k2)
            k4 = f(ri, yi + hi * k3)
            y[act] = yi + hi / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        return y


def flow(spec: Semiflow, i: int, t: float, y: ArrayLike) -> NDArray[np.float64]:
    """``S_i(t, y)`` for a single point."""
    if not (t >= 0):
        raise InputError(f"flow time must be nonnegative, got {t}")
    if not 0 <= i < spec.n_regimes:
        raise InputError(f"regime {i} out of range")
    y = np.array(y, dtype=np.float64, ndmin=1)
    if y.size != spec.d:
        raise InputError(f"dimension mismatch: flow has d={spec.d}, y has {y.size}")
    return spec.flow_batch(np.array([i]), np.array([float(t)]), y[None, :])[0]


# --- phi and script-L families -------------------------------------------------


@dataclass(frozen=True)
class ExpSumPhi:
    """``phi(t) = sum_m coef_m * exp(rate_m * t)``; Laplace transform in closed form."""

    coefs: tuple[float, ...] = ()
    rates: tuple[float, ...] = ()

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        out = np.zeros_like(t)
        for c, b in zip(self.coefs, self.rates):
            out = out + c * np.exp(b * t)
        return out

    def laplace(self, lam: float) -> float:
        total = 0.0
        for c, b in zip(self.coefs, self.rates):
            if c == 0:
                continue
            if b >= lam:
                raise DomainError(f"K_phi diverges: exponent {b} >= lambda {lam}")
            total += c / (lam - b)
        return total


@dataclass(frozen=True)
class CallablePhi:
    """Arbitrary ``phi``; integrated numerically."""

    func: Callable[[float], float]
    monotone: bool = False

    def __call__(self, t):
        return np.vectorize(self.func, otypes=[float])(t)


def phi_example(r_norm: float, alpha: float) -> ExpSumPhi:
    """``|r| (1 - exp(alpha t))``, the divergence of two flows with common rate."""
    return ExpSumPhi((abs(r_norm), -abs(r_norm)), (0.0, alpha))


def phi_rate_gap(alpha_hi: float, alpha_lo: float) -> ExpSumPhi:
    """``exp(alpha_hi t) - exp(alpha_lo t)`` with ``alpha_hi >= alpha_lo``."""
    return ExpSumPhi((1.0, -1.0), (alpha_hi, alpha_lo))


@dataclass(frozen=True)
class ConstantGrowth:
    value: float = 1.0

    def __call__(self, ys, metric: HybridMetric | None = None):
        ys = np.atleast_2d(np.asarray(ys, dtype=np.float64))
        return np.full(ys.shape[0], float(self.value))

    def sup_on_ball(self, center, radius, metric) -> tuple[float, bool]:
        return float(self.value), True


@dataclass(frozen=True)
class NormGrowth:
    """``slope * rho_Y(y, center) + offset``."""

    slope: float = 1.0
    offset: float = 0.0
    center: tuple[float, ...] | None = None

    def _center(self, d: int) -> NDArray:
        return np.zeros(d) if self.center is None else np.asarray(self.center, dtype=np.float64)

    def __call__(self, ys, metric: HybridMetric | None = None):
        metric = metric or HybridMetric()
        ys = np.atleast_2d(np.asarray(ys, dtype=np.float64))
        return self.slope * metric.y_distance(ys, self._center(ys.shape[1])) + self.offset

    def sup_on_ball(self, center, radius, metric) -> tuple[float, bool]:
        center = np.asarray(center, dtype=np.float64)
        dist = float(metric.y_distance(center, self._center(center.size)))
        return self.slope * (dist + radius) + self.offset, True


@dataclass(frozen=True)
class CallableGrowth:
    """Arbitrary ``script-L``; suprema are sampled, hence approximate."""

    func: Callable[[NDArray], NDArray]

    def __call__(self, ys, metric: HybridMetric | None = None):
        return np.asarray(self.func(np.atleast_2d(np.asarray(ys, dtype=np.float64))), dtype=np.float64)

    def sup_on_ball(self, center, radius, metric, n_nodes: int = 10_000) -> tuple[float, bool]:
        center = np.asarray(center, dtype=np.float64)
        d = center.size
        pts = qmc.Halton(d=d, scramble=False).random(n_nodes + 1)[1:]
        cube = center + radius * (2 * pts - 1)
        inside = np.asarray(metric.y_distance(cube, center)) <= radius
        nodes = np.vstack([center[None, :], cube[inside]])
        return float(np.max(self(nodes, metric))), False


@dataclass(frozen=True)
class FlowRegularityCertificate:
    """Claimed constants for the Lipschitz envelope and the flow divergence bound.

    Asserts ``rho(S_i(t,u), S_i(t,v)) <= L exp(alpha t) rho(u, v)`` and
    ``rho(S_i(t,y), S_j(t,y)) <= phi(t) Lfun(y)``.
    """

    L: float
    alpha: float
    phi: ExpSumPhi | CallablePhi
    Lfun: ConstantGrowth | NormGrowth | CallableGrowth
    exact: bool = True

    def __post_init__(self) -> None:
        if not (self.L > 0):
            raise InputError("L must be positive")


def affine_certificate(spec: AffineSemiflow, metric: HybridMetric | None = None) -> FlowRegularityCertificate:
    """Certificate for an affine family with scalar rates.

    Exact (sharp) when all rates coincide or all fixed points coincide; otherwise
    a valid but non-sharp bound with ``Lfun(y) = |y| + 1``.
    """
    metric = metric or HybridMetric()
    a, r = spec.alphas, spec.fixed_points
    a_hi, a_lo = float(a.max()), float(a.min())
    if spec.n_regimes == 1 or np.all(r == r[0]):
        if a_hi == a_lo:
            return FlowRegularityCertificate(1.0, a_hi, ExpSumPhi(), ConstantGrowth(0.0))
        return FlowRegularityCertificate(
            1.0, a_hi, phi_rate_gap(a_hi, a_lo), NormGrowth(1.0, 0.0, tuple(r[0]))
        )
    if a_hi == a_lo:
        spread = max(
            float(metric.y_distance(r[i], r[j])) for i, j in itertools.combinations(range(spec.n_regimes), 2)
        )
        return FlowRegularityCertificate(1.0, a_hi, phi_example(spread, a_hi), ConstantGrowth(1.0))

    def phi(t: float) -> float:
        e = np.exp(a * t)
        shifts = (1 - e)[:, None] * r
        gap = max(float(metric.y_distance(shifts[i], shifts[j])) for i, j in itertools.product(range(len(a)), repeat=2))
        return float(e.max() - e.min()) + gap

    return FlowRegularityCertificate(1.0, a_hi, CallablePhi(phi), NormGrowth(1.0, 1.0), exact=False)


def K_phi(cert: FlowRegularityCertificate, lam: float, method: str = "auto") -> float:
    """``int_0^inf exp(-lam t) phi(t) dt``.

    ``method="auto"`` uses the closed form when ``phi`` is an exponential sum and
    adaptive quadrature otherwise; ``"quad"`` forces quadrature.
    """
    if not (lam > 0):
        raise InputError(f"lambda must be positive, got {lam}")
    phi = cert.phi
    if method == "auto" and isinstance(phi, ExpSumPhi):
        return phi.laplace(lam)
    if isinstance(phi, ExpSumPhi):
        for c, b in zip(phi.coefs, phi.rates):
            if c != 0 and b >= lam:
                raise DomainError(f"K_phi diverges: exponent {b} >= lambda {lam}")
    return _laplace_quad(lambda t: float(phi(t)), lam)


def _laplace_quad(func: Callable[[float], float], lam: float) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, _ = integrate.quad(
                lambda t: math.exp(-lam * t) * func(t), 0.0, np.inf, epsrel=KPHI_RTOL, epsabs=1e-13, limit=500
            )
        except (integrate.IntegrationWarning, OverflowError) as exc:
            raise DomainError(f"Laplace integral does not converge at lambda={lam}: {exc}") from exc
    if not math.isfinite(val):
        raise DomainError(f"Laplace integral diverges at lambda={lam}")
    return val


def sup_phi(phi: ExpSumPhi | CallablePhi, t_max: float, n_grid: int = 4001) -> float:
    """``sup {phi(t): 0 <= t <= t_max}`` by a dense grid refined with a bounded search."""
    grid = np.linspace(0.0, t_max, n_grid)
    vals = np.asarray(phi(grid), dtype=np.float64)
    k = int(np.argmax(vals))
    best = float(vals[k])
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, n_grid - 1)]
    if hi > lo:
        res = optimize.minimize_scalar(lambda t: -float(phi(t)), bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-12})
        best = max(best, -float(res.fun))
    return best


# --- hypothesis checks ---------------------------------------------------------


def _take(sampler: Iterable, n: int) -> list:
    out = list(itertools.islice(iter(sampler), n))
    if len(out) < n:
        raise SamplerExhausted(f"sampler produced {len(out)} of {n} requested samples")
    return out


def _caveats(spec: Semiflow) -> list[str]:
    if spec.kind == "integrated-ode":
        return [f"integrated-ode flow: ratios carry RK4 error (semigroup tolerance {TOL_SEMIGROUP})"]
    return []


def check_A3(
    spec: Semiflow,
    cert: FlowRegularityCertificate,
    sampler: Iterable[tuple],
    n_pairs: int,
    metric: HybridMetric | None = None,
) -> CheckResult:
    """Worst sampled ``rho(S_i(t,u), S_i(t,v)) / (L e^{alpha t} rho(u,v))``.

    ``sampler`` yields ``(u, v, t, i)``; pairs with ``u == v`` are skipped.
    """
    if n_pairs < 1:
        raise InputError("n_pairs must be >= 1")
    metric = metric or HybridMetric()
    samples = _take(sampler, n_pairs)
    u = np.array([s[0] for s in samples], dtype=np.float64).reshape(n_pairs, -1)
    v = np.array([s[1] for s in samples], dtype=np.float64).reshape(n_pairs, -1)
    t = np.array([s[2] for s in samples], dtype=np.float64)
    i = np.array([s[3] for s in samples], dtype=np.int64)
    d0 = np.asarray(metric.y_distance(u, v))
    keep = d0 > 0
    if np.any(t < 0):
        raise InputError("sampler produced a negative time")
    d1 = np.asarray(metric.y_distance(spec.flow_batch(i, t, u), spec.flow_batch(i, t, v)))
    bound = cert.L * np.exp(cert.alpha * t) * d0
    ratio = np.zeros(n_pairs)
    ratio[keep] = d1[keep] / bound[keep]
    worst = float(ratio.max())
    return CheckResult(
        name="A3", passed=worst <= 1 + RATIO_TOL, worst=worst, threshold=1.0, slack=RATIO_TOL,
        n=int(keep.sum()), caveats=_caveats(spec), detail={"skipped_degenerate": float((~keep).sum())},
    )


def check_A4(
    spec: Semiflow,
    cert: FlowRegularityCertificate,
    sampler: Iterable[tuple],
    n_samples: int,
    metric: HybridMetric | None = None,
) -> CheckResult:
    """Worst sampled ``rho(S_i(t,y), S_j(t,y)) / (phi(t) Lfun(y))``.

    ``sampler`` yields ``(y, t, i, j)``. Zero divergence counts as ratio 0; a
    positive divergence against a zero bound gives an infinite ratio.
    """
    if n_samples < 1:
        raise InputError("n_samples must be >= 1")
    metric = metric or HybridMetric()
    samples = _take(sampler, n_samples)
    y = np.array([s[0] for s in samples], dtype=np.float64).reshape(n_samples, -1)
    t = np.array([s[1] for s in samples], dtype=np.float64)
    i = np.array([s[2] for s in samples], dtype=np.int64)
    j = np.array([s[3] for s in samples], dtype=np.int64)
    div = np.asarray(metric.y_distance(spec.flow_batch(i, t, y), spec.flow_batch(j, t, y)))
    bound = np.asarray(cert.phi(t), dtype=np.float64) * np.asarray(cert.Lfun(y, metric))
    ratio = np.zeros(n_samples)
    pos = div > 0
    with np.errstate(divide="ignore"):
        ratio[pos] = np.where(bound[pos] > 0, div[pos] / np.where(bound[pos] > 0, bound[pos], 1.0), np.inf)
    worst = float(ratio.max())
    caveats = _caveats(spec)
    if isinstance(cert.Lfun, CallableGrowth):
        caveats.append("Lfun boundedness on bounded sets is sampled, not proven")
    return CheckResult(
        name="A4", passed=worst <= 1 + RATIO_TOL, worst=worst, threshold=1.0, slack=RATIO_TOL,
        n=n_samples, caveats=caveats, detail={"max_divergence": float(div.max())},
    )


def pair_sampler(
    rng: np.random.Generator, low: Sequence[float] | float, high: Sequence[float] | float,
    d: int, n_regimes: int, t_max: float = 5.0,
):
    """Endless ``(u, v, t, i)`` draws: ``u, v`` uniform on a box, ``t`` uniform on ``[0, t_max]``."""
    low = np.broadcast_to(np.asarray(low, dtype=np.float64), (d,))
    high = np.broadcast_to(np.asarray(high, dtype=np.float64), (d,))
    while True:
        yield rng.uniform(low, high), rng.uniform(low, high), rng.uniform(0, t_max), int(rng.integers(n_regimes))


def divergence_sampler(
    rng: np.random.Generator, low: Sequence[float] | float, high: Sequence[float] | float,
    d: int, n_regimes: int, t_max: float = 5.0,
):
    """Endless ``(y, t, i, j)`` draws for :func:`check_A4`."""
    low = np.broadcast_to(np.asarray(low, dtype=np.float64), (d,))
    high = np.broadcast_to(np.asarray(high, dtype=np.float64), (d,))
    while True:
        yield (rng.uniform(low, high), rng.uniform(0, t_max),
               int(rng.integers(n_regimes)), int(rng.integers(n_regimes)))
