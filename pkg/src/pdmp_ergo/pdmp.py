"""Simulation of the post-jump chain, the interpolated process and the operators G, W.

One step of the augmented chain from ``(y, i, s)``:

1. ``h ~ Exp(lam)`` from one uniform by inverse CDF;
2. flow: ``v = S_i(h, y)``;
3. jump: ``y' ~ J(v, .)``;
4. switch: ``j ~ pi[i, .]``;

giving ``(y', j, s + h)``. The order is fixed, so ``apply_G`` followed by
``apply_W`` on the same generator consumes exactly the uniforms of one chain
step.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from .core import AugmentedState, HybridMetric, HybridState
from .errors import ConfigError, HorizonError, InputError
from .jump import JumpKernel, categorical
from .semiflow import AffineSemiflow, OdeSemiflow

PI_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ModelSpec:
    semiflows: AffineSemiflow | OdeSemiflow
    jump: JumpKernel
    pi: NDArray[np.float64]
    lam: float
    ystar: NDArray[np.float64]
    metric: HybridMetric
    name: str = "custom"

    def __post_init__(self) -> None:
        pi = np.array(self.pi, dtype=np.float64, ndmin=2)
        k = self.semiflows.n_regimes
        if pi.shape != (k, k):
            raise ConfigError(f"switching matrix must be {k}x{k}, got {pi.shape}")
        if np.any(pi < 0) or np.any(np.abs(pi.sum(axis=1) - 1) > PI_TOL):
            raise ConfigError("switching matrix rows must be probability vectors")
        if not (self.lam > 0):
            raise ConfigError(f"jump rate lambda must be positive, got {self.lam}")
        ystar = np.array(self.ystar, dtype=np.float64, ndmin=1)
        if ystar.size != self.semiflows.d or self.jump.d != self.semiflows.d:
            raise ConfigError("flows, jump kernel and y* disagree on the dimension d")
        pi.setflags(write=False)
        ystar.setflags(write=False)
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "ystar", ystar)

    @property
    def d(self) -> int:
        return self.semiflows.d

    @property
    def n_regimes(self) -> int:
        return self.semiflows.n_regimes

    def holding_times(self, rng: np.random.Generator, n: int) -> NDArray[np.float64]:
        return -np.log1p(-rng.random(n)) / self.lam

    def switch(self, regimes: NDArray[np.int64], rng: np.random.Generator) -> NDArray[np.int64]:
        return categorical(self.pi[regimes], rng.random(regimes.shape[0]))


@dataclass(frozen=True, eq=False)
class ChainTrajectory:
    """States ``Phi_n`` and jump times ``tau_n`` of one trajectory (``tau_0 = 0``)."""

    ys: NDArray[np.float64]
    regimes: NDArray[np.int64]
    taus: NDArray[np.float64]

    def __len__(self) -> int:
        return self.taus.shape[0]

    @property
    def states(self) -> list[HybridState]:
        return [HybridState(y, int(i)) for y, i in zip(self.ys, self.regimes)]

    @property
    def jump_times(self) -> list[float]:
        return self.taus.tolist()


@dataclass(frozen=True, eq=False)
class ChainBatch:
    """Many trajectories of equal length; arrays are ``(n_traj, n_steps + 1, ...)``."""

    ys: NDArray[np.float64]
    regimes: NDArray[np.int64]
    taus: NDArray[np.float64]

    def trajectory(self, k: int) -> ChainTrajectory:
        return ChainTrajectory(self.ys[k], self.regimes[k], self.taus[k])


def _check_state(model: ModelSpec, x: HybridState) -> None:
    if x.d != model.d:
        raise InputError(f"state has d={x.d}, model has d={model.d}")
    if x.i >= model.n_regimes:
        raise InputError(f"regime {x.i} out of range for {model.n_regimes} regimes")


def step_batch(model: ModelSpec, ys, regimes, rng: np.random.Generator):
    """One chain step for a batch. Returns ``(ys', regimes', holding times)``."""
    ys = np.asarray(ys, dtype=np.float64)
    regimes = np.asarray(regimes, dtype=np.int64)
    h = model.holding_times(rng, ys.shape[0])
    v = model.semiflows.flow_batch(regimes, h, ys)
    y_new, _ = model.jump.sample_batch(v, rng)
    return y_new, model.switch(regimes, rng), h


def step_chain(model: ModelSpec, state: AugmentedState, rng: np.random.Generator) -> AugmentedState:
    _check_state(model, state.x)
    y, j, h = step_batch(model, state.x.y[None, :], np.array([state.x.i]), rng)
    return AugmentedState(HybridState(y[0], int(j[0])), state.tau + float(h[0]))


def simulate_batch(model: ModelSpec, ys0, regimes0, n: int, rng: np.random.Generator) -> ChainBatch:
    if n < 0:
        raise InputError("n must be >= 0")
    ys0 = np.atleast_2d(np.asarray(ys0, dtype=np.float64))
    regimes0 = np.broadcast_to(np.asarray(regimes0, dtype=np.int64), (ys0.shape[0],))
    m = ys0.shape[0]
    ys = np.empty((m, n + 1, model.d))
    reg = np.empty((m, n + 1), dtype=np.int64)
    taus = np.zeros((m, n + 1))
    ys[:, 0], reg[:, 0] = ys0, regimes0
    for k in range(n):
        ys[:, k + 1], reg[:, k + 1], h = step_batch(model, ys[:, k], reg[:, k], rng)
        taus[:, k + 1] = taus[:, k] + h
    return ChainBatch(ys, reg, taus)


def simulate_chain(model: ModelSpec, x0: HybridState, n: int, rng: np.random.Generator) -> ChainTrajectory:
    _check_state(model, x0)
    return simulate_batch(model, x0.y[None, :], np.array([x0.i]), n, rng).trajectory(0)


def simulate_chain_from(model: ModelSpec, x0: HybridState, n_traj: int, n: int, rng: np.random.Generator) -> ChainBatch:
    """``n_traj`` independent trajectories started at ``x0``."""
    _check_state(model, x0)
    return simulate_batch(model, np.repeat(x0.y[None, :], n_traj, axis=0), np.full(n_traj, x0.i), n, rng)


def process_at(model: ModelSpec, traj: ChainTrajectory, t: float) -> HybridState:
    """``Psi(t) = (S_{xi_n}(t - tau_n, Y_n), xi_n)`` for ``tau_n <= t < tau_{n+1}``."""
    if not (t >= 0):
        raise InputError("t must be nonnegative")
    if t >= traj.taus[-1]:
        raise HorizonError(f"t={t} is beyond the simulated horizon tau={traj.taus[-1]}; extend the trajectory")
    n = int(np.searchsorted(traj.taus, t, side="right") - 1)
    i = int(traj.regimes[n])
    y = model.semiflows.flow_batch(np.array([i]), np.array([t - traj.taus[n]]), traj.ys[n][None, :])[0]
    return HybridState(y, i)


def process_snapshot(model: ModelSpec, ys0, regimes0, T: float, rng: np.random.Generator):
    """``Psi(T)`` for a batch of independent processes, each simulated up to ``T``."""
    ys = np.array(np.atleast_2d(ys0), dtype=np.float64)
    reg = np.array(np.broadcast_to(regimes0, (ys.shape[0],)), dtype=np.int64)
    tau = np.zeros(ys.shape[0])
    out_y = np.empty_like(ys)
    active = np.arange(ys.shape[0])
    while active.size:
        h = model.holding_times(rng, active.size)
        jumps = tau[active] + h <= T
        stop = active[~jumps]
        out_y[stop] = model.semiflows.flow_batch(reg[stop], T - tau[stop], ys[stop])
        go = active[jumps]
        v = model.semiflows.flow_batch(reg[go], h[jumps], ys[go])
        ys[go], _ = model.jump.sample_batch(v, rng)
        reg[go] = model.switch(reg[go], rng)
        tau[go] += h[jumps]
        active = go
    return out_y, reg


def apply_G_batch(model: ModelSpec, ys, regimes, rng: np.random.Generator):
    ys = np.atleast_2d(np.asarray(ys, dtype=np.float64))
    regimes = np.asarray(regimes, dtype=np.int64)
    t = model.holding_times(rng, ys.shape[0])
    return model.semiflows.flow_batch(regimes, t, ys), regimes.copy()


def apply_W_batch(model: ModelSpec, ys, regimes, rng: np.random.Generator):
    ys = np.atleast_2d(np.asarray(ys, dtype=np.float64))
    regimes = np.asarray(regimes, dtype=np.int64)
    y_new, _ = model.jump.sample_batch(ys, rng)
    return y_new, model.switch(regimes, rng)


def apply_G(model: ModelSpec, x: HybridState, rng: np.random.Generator) -> HybridState:
    """Flow for an ``Exp(lam)`` time; the regime is kept."""
    _check_state(model, x)
    y, i = apply_G_batch(model, x.y[None, :], np.array([x.i]), rng)
    return HybridState(y[0], int(i[0]))


def apply_W(model: ModelSpec, x: HybridState, rng: np.random.Generator) -> HybridState:
    """Jump via ``J`` and switch via ``pi`` with independent draws."""
    _check_state(model, x)
    y, i = apply_W_batch(model, x.y[None, :], np.array([x.i]), rng)
    return HybridState(y[0], int(i[0]))


# --- CSV export -------------------------------------------------------------------


def write_trajectories_csv(path: str | Path, batch: ChainBatch | ChainTrajectory) -> None:
    """Columns ``n, tau, y_0..y_{d-1}, regime, trajectory``; floats written with ``repr``."""
    if isinstance(batch, ChainTrajectory):
        batch = ChainBatch(batch.ys[None], batch.regimes[None], batch.taus[None])
    d = batch.ys.shape[2]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "tau", *[f"y_{k}" for k in range(d)], "regime", "trajectory"])
        for traj in range(batch.ys.shape[0]):
            for n in range(batch.ys.shape[1]):
                w.writerow([n, repr(float(batch.taus[traj, n])), *[repr(float(v)) for v in batch.ys[traj, n]],
                            int(batch.regimes[traj, n]), traj])


def read_trajectories_csv(path: str | Path) -> dict[str, NDArray]:
    """Load a trajectory export into column arrays (``y`` stacked as ``(rows, d)``)."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise InputError(f"{path} has no data rows")
    ycols = sorted((c for c in rows[0] if c.startswith("y_")), key=lambda c: int(c[2:]))
    out: dict[str, NDArray] = {
        c: np.array([float(r[c]) for r in rows]) for c in rows[0] if not c.startswith("y_")
    }
    out["y"] = np.array([[float(r[c]) for c in ycols] for r in rows])
    return out


def slice_measure(columns: dict[str, NDArray], column: str, value: float):
    """Rows whose ``column`` equals ``value`` as ``(ys, regimes)``."""
    if column not in columns:
        raise InputError(f"column {column!r} not present; have {sorted(columns)}")
    sel = columns[column] == value
    if not np.any(sel):
        raise InputError(f"no rows with {column} == {value}")
    return columns["y"][sel], columns["regime"][sel].astype(np.int64)


__all__ = [
    "ModelSpec", "ChainTrajectory", "ChainBatch", "step_chain", "step_batch", "simulate_chain",
    "simulate_batch", "simulate_chain_from", "process_at", "process_snapshot", "apply_G", "apply_W",
    "apply_G_batch", "apply_W_batch", "write_trajectories_csv", "read_trajectories_csv", "slice_measure",
]
