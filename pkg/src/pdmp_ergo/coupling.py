"""Exact sampler for the augmented coupling kernel and coupled trajectories.

Every coupled step shares one holding time ``h ~ Exp(lam)``. Given ``h`` and the
flowed points ``v_k = S_{i_k}(h, y_k)`` the synchronous mass is

    q(h) = sum_j min(pi[i1, j], pi[i2, j]) * sum_k min(p_k(v1), p_k(v2)).

With probability ``q(h)`` both coordinates take the same regime ``j*`` and the
same jump map (the Q-branch). Otherwise each coordinate independently draws
``(j, theta)`` from its own residual weights

    r_k(j, theta) = pi[i_k, j] p_theta(v_k) - min(pi[i1, j], pi[i2, j]) min(p_theta(v1), p_theta(v2)),

normalised by ``1 - q(h)`` (the R-branch). Conditioning on ``h`` before splitting
keeps the sampler exact and rejection-free: each coordinate's one-step law is
still ``P(x_k, .)`` and the shared clock increment is still ``Exp(lam)``. This is
a per-``h`` version of the residual kernel, which itself integrates ``h`` inside
each residual factor.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from .core import HybridState
from .errors import HorizonError, InputError, InvariantViolation
from .jump import AdditiveBurstKernel, JumpRegularityCertificate, categorical
from .pdmp import ModelSpec

MASS_TOL = 1e-12
N_UNIFORMS = 7  # per pair and step: branch, j*, theta*, joint residual x2, burst sizes x2


@dataclass(frozen=True)
class CoupledState:
    x1: HybridState
    x2: HybridState
    tau: float = 0.0

    def __post_init__(self) -> None:
        if self.x1.d != self.x2.d:
            raise InputError("coupled coordinates must share the dimension d")
        if not (self.tau >= 0):
            raise InputError("tau must be nonnegative")


def step_coupled_batch(model: ModelSpec, y1, i1, y2, i2, rng: np.random.Generator):
    """One coupled step for a batch of pairs.

    Returns ``(y1', i1', y2', i2', h, q_branch)`` where ``q_branch`` is a boolean
    array marking the synchronous branch.
    """
    y1 = np.asarray(y1, dtype=np.float64)
    y2 = np.asarray(y2, dtype=np.float64)
    i1 = np.asarray(i1, dtype=np.int64)
    i2 = np.asarray(i2, dtype=np.int64)
    n = y1.shape[0]
    h = model.holding_times(rng, n)
    u = rng.random((n, N_UNIFORMS))
    v1 = model.semiflows.flow_batch(i1, h, y1)
    v2 = model.semiflows.flow_batch(i2, h, y2)
    pi1, pi2 = model.pi[i1], model.pi[i2]
    pmin = np.minimum(pi1, pi2)
    m = pmin.sum(axis=1)
    kernel = model.jump

    if isinstance(kernel, AdditiveBurstKernel):
        q = m
        qb = u[:, 0] < q
        e = np.asarray(kernel.direction)[None, :]
        j_star = categorical(pmin, u[:, 1])
        theta_star = kernel.draw_sizes(u[:, 2])
        r1 = pi1 - pmin
        r2 = pi2 - pmin
        _check_residual(r1, r2)
        j1 = np.where(qb, j_star, categorical(np.clip(r1, 0, None), u[:, 3]))
        j2 = np.where(qb, j_star, categorical(np.clip(r2, 0, None), u[:, 4]))
        th1 = np.where(qb, theta_star, kernel.draw_sizes(u[:, 5]))
        th2 = np.where(qb, theta_star, kernel.draw_sizes(u[:, 6]))
        return v1 + th1[:, None] * e, j1, v2 + th2[:, None] * e, j2, h, qb

    p1, p2 = kernel.weights(v1), kernel.weights(v2)
    pj = np.minimum(p1, p2)
    q = m * pj.sum(axis=1)
    if np.any(q > 1 + MASS_TOL):
        raise InvariantViolation(f"coupled mass exceeds 1: {q.max()}")
    qb = u[:, 0] < q
    j_star = categorical(pmin, u[:, 1])
    theta_star = categorical(pj, u[:, 2])
    K = kernel.n_maps
    joint_min = pmin[:, :, None] * pj[:, None, :]
    r1 = (pi1[:, :, None] * p1[:, None, :] - joint_min).reshape(n, -1)
    r2 = (pi2[:, :, None] * p2[:, None, :] - joint_min).reshape(n, -1)
    _check_residual(r1, r2)
    k1 = categorical(np.clip(r1, 0, None), u[:, 3])
    k2 = categorical(np.clip(r2, 0, None), u[:, 4])
    j1 = np.where(qb, j_star, k1 // K)
    j2 = np.where(qb, j_star, k2 // K)
    th1 = np.where(qb, theta_star, k1 % K)
    th2 = np.where(qb, theta_star, k2 % K)
    return kernel.apply(th1, v1), j1, kernel.apply(th2, v2), j2, h, qb


def _check_residual(r1: NDArray, r2: NDArray) -> None:
    low = min(float(r1.min(initial=0.0)), float(r2.min(initial=0.0)))
    if low < -MASS_TOL:
        raise InvariantViolation(f"residual weight {low} is negative")


def step_coupled(
    model: ModelSpec,
    cert: JumpRegularityCertificate | None,
    z: CoupledState,
    rng: np.random.Generator,
) -> tuple[CoupledState, str]:
    """One coupled step for a single pair; returns the new state and ``"Q"`` or ``"R"``.

    ``cert`` is accepted for interface symmetry with the checkers; sampling does
    not depend on it.
    """
    y1, j1, y2, j2, h, qb = step_coupled_batch(
        model, z.x1.y[None, :], [z.x1.i], z.x2.y[None, :], [z.x2.i], rng
    )
    nz = CoupledState(HybridState(y1[0], int(j1[0])), HybridState(y2[0], int(j2[0])), z.tau + float(h[0]))
    return nz, "Q" if qb[0] else "R"


@dataclass(frozen=True, eq=False)
class CoupledBatch:
    """Coupled trajectories; state arrays are ``(n_pairs, n_steps + 1, ...)``.

    ``regimes2_raw`` is the simulated second regime; :meth:`regimes2` optionally
    overwrites it with the first coordinate's regime after the coupling time.
    """

    ys1: NDArray[np.float64]
    regimes1: NDArray[np.int64]
    ys2: NDArray[np.float64]
    regimes2_raw: NDArray[np.int64]
    taus: NDArray[np.float64]
    q_branch: NDArray[np.bool_]

    @property
    def n_pairs(self) -> int:
        return self.taus.shape[0]

    @property
    def kappa(self) -> NDArray[np.int64]:
        """First index with equal regimes; ``-1`` when never reached in the horizon."""
        eq = self.regimes1 == self.regimes2_raw
        return np.where(eq.any(axis=1), eq.argmax(axis=1), -1)

    def regimes2(self, identify: bool = False) -> NDArray[np.int64]:
        if not identify:
            return self.regimes2_raw
        kappa = self.kappa
        n = np.arange(self.taus.shape[1])[None, :]
        after = (kappa[:, None] >= 0) & (n > kappa[:, None])
        return np.where(after, self.regimes1, self.regimes2_raw)

    def rho_bar(self, model: ModelSpec, identify: bool = False) -> NDArray[np.float64]:
        return model.metric.truncated(self.ys1, self.regimes1, self.ys2, self.regimes2(identify))

    def trace(self, k: int, identify: bool = False) -> CoupledTrace:
        i2 = self.regimes2(identify)[k]
        states = [
            CoupledState(HybridState(self.ys1[k, n], int(self.regimes1[k, n])),
                         HybridState(self.ys2[k, n], int(i2[n])), float(self.taus[k, n]))
            for n in range(self.taus.shape[1])
        ]
        flags = ["Q" if f else "R" for f in self.q_branch[k]]
        kap = int(self.kappa[k])
        return CoupledTrace(states, flags, None if kap < 0 else kap, identify)


@dataclass(frozen=True)
class CoupledTrace:
    states: list[CoupledState]
    branch_flags: list[str]
    kappa: int | None  # None: regimes never met within the horizon
    identified: bool = False


def simulate_coupled_batch(
    model: ModelSpec, y1, i1, y2, i2, n: int | None, rng: np.random.Generator, until: float | None = None
) -> CoupledBatch:
    """Run coupled pairs for ``n`` steps, or until every pair's clock exceeds ``until``."""
    if n is None and until is None:
        raise InputError("give n or until")
    if n is not None and n < 0:
        raise InputError("n must be >= 0")
    y1 = np.atleast_2d(np.asarray(y1, dtype=np.float64))
    y2 = np.atleast_2d(np.asarray(y2, dtype=np.float64))
    m = max(y1.shape[0], y2.shape[0])
    y1 = np.broadcast_to(y1, (m, model.d)).copy()
    y2 = np.broadcast_to(y2, (m, model.d)).copy()
    i1 = np.broadcast_to(np.asarray(i1, dtype=np.int64), (m,)).copy()
    i2 = np.broadcast_to(np.asarray(i2, dtype=np.int64), (m,)).copy()
    cols = {"y1": [y1], "i1": [i1], "y2": [y2], "i2": [i2], "tau": [np.zeros(m)], "q": []}
    k = 0
    while (n is not None and k < n) or (n is None and cols["tau"][-1].min() <= until):
        a, b, c, d, h, qb = step_coupled_batch(model, cols["y1"][-1], cols["i1"][-1], cols["y2"][-1], cols["i2"][-1], rng)
        for key, val in zip(("y1", "i1", "y2", "i2", "q"), (a, b, c, d, qb)):
            cols[key].append(val)
        cols["tau"].append(cols["tau"][-1] + h)
        k += 1
    q = np.stack(cols["q"], axis=1) if cols["q"] else np.zeros((m, 0), dtype=bool)
    return CoupledBatch(
        np.stack(cols["y1"], axis=1), np.stack(cols["i1"], axis=1),
        np.stack(cols["y2"], axis=1), np.stack(cols["i2"], axis=1),
        np.stack(cols["tau"], axis=1), q,
    )


def simulate_coupled(
    model: ModelSpec,
    cert: JumpRegularityCertificate | None,
    x1: HybridState,
    x2: HybridState,
    n: int,
    rng: np.random.Generator,
    identify_regimes: bool = False,
) -> CoupledTrace:
    batch = simulate_coupled_batch(model, x1.y, x1.i, x2.y, x2.i, n, rng)
    return batch.trace(0, identify_regimes)


def coupled_process_batch(model: ModelSpec, batch: CoupledBatch, t_grid, identify: bool = True):
    """Interpolated copies ``(Psi1(t), Psi2(t))`` on a time grid with the shared clock.

    Returns ``(ys1, regimes1, ys2, regimes2)`` with leading shape ``(n_pairs, len(t_grid))``.
    """
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=np.float64))
    if np.any(t_grid < 0):
        raise InputError("times must be nonnegative")
    last = batch.taus[:, -1]
    if np.any(t_grid.max() >= last):
        raise HorizonError(f"t={t_grid.max()} beyond the simulated horizon of some pairs (min tau={last.min()})")
    m, T = batch.n_pairs, t_grid.size
    idx = np.stack([(batch.taus <= t).sum(axis=1) - 1 for t in t_grid], axis=1)
    rows = np.arange(m)[:, None]
    tau_n = batch.taus[rows, idx]
    i1 = batch.regimes1[rows, idx]
    i2 = batch.regimes2(identify)[rows, idx]
    dt = (t_grid[None, :] - tau_n).ravel()
    f = model.semiflows.flow_batch
    ys1 = f(i1.ravel(), dt, batch.ys1[rows, idx].reshape(m * T, -1)).reshape(m, T, -1)
    ys2 = f(i2.ravel(), dt, batch.ys2[rows, idx].reshape(m * T, -1)).reshape(m, T, -1)
    return ys1, i1, ys2, i2


def coupled_process_at(
    model: ModelSpec, trace: CoupledTrace, t: float, identify_regimes: bool | None = None
) -> tuple[HybridState, HybridState]:
    """Both coordinates of the coupled process at time ``t``.

    With ``identify_regimes`` set, the second regime follows the first after
    the coupling time; by default the trace's own setting is used.
    """
    identify = trace.identified if identify_regimes is None else identify_regimes
    taus = np.array([s.tau for s in trace.states])
    if not (t >= 0):
        raise InputError("t must be nonnegative")
    if t >= taus[-1]:
        raise HorizonError(f"t={t} is beyond the simulated horizon tau={taus[-1]}")
    n = int(np.searchsorted(taus, t, side="right") - 1)
    s = trace.states[n]
    i2 = s.x2.i
    if identify and trace.kappa is not None and n > trace.kappa:
        i2 = s.x1.i
    f = model.semiflows.flow_batch
    dt = np.array([t - taus[n]])
    y1 = f(np.array([s.x1.i]), dt, s.x1.y[None, :])[0]
    y2 = f(np.array([i2]), dt, s.x2.y[None, :])[0]
    return HybridState(y1, s.x1.i), HybridState(y2, i2)


def write_trace_csv(path: str | Path, model: ModelSpec, trace: CoupledTrace) -> None:
    """Columns ``n, tau, y1_*, i1, y2_*, i2, branch, rho_bar`` (branch empty at n=0)."""
    d = trace.states[0].x1.d
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "tau", *[f"y1_{k}" for k in range(d)], "i1", *[f"y2_{k}" for k in range(d)],
                    "i2", "branch", "rho_bar"])
        for n, s in enumerate(trace.states):
            rb = float(model.metric.truncated(s.x1.y, s.x1.i, s.x2.y, s.x2.i))
            w.writerow([n, repr(s.tau), *[repr(float(v)) for v in s.x1.y], s.x1.i,
                        *[repr(float(v)) for v in s.x2.y], s.x2.i,
                        "" if n == 0 else trace.branch_flags[n - 1], repr(rb)])
