"""Fortet-Mourier (bounded-Lipschitz) distance between finitely supported measures.

For a signed mass ``sigma = mu - nu`` on atoms ``x_1..x_N`` the distance is the
value of the linear program

    maximise  sum_k sigma_k f_k
    s.t.      0 <= f_k <= 1,   |f_k - f_l| <= rho(x_k, x_l).

Constraints with ``rho >= 1`` are implied by the box and dropped. Two exact
solvers are provided:

* a path solver for ``d = 1`` with ``c >= 1``: regimes decouple and, inside one
  regime, only neighbouring atoms constrain each other, so the LP is a chain
  solved by dynamic programming over concave piecewise-linear value functions;
* HiGHS (through :func:`scipy.optimize.linprog`) on the thinned sparse
  constraint set for everything else.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numba
import numpy as np
from numpy.typing import NDArray
from scipy import optimize, sparse
from scipy.spatial import cKDTree

from .core import EmpiricalMeasure, HybridMetric
from .errors import InputError, InvariantViolation

LP_TOL = 1e-9
ORACLE_MAX_ATOMS = 4
ORACLE_STEP = 1e-3


@dataclass(frozen=True, eq=False)
class FmProblem:
    """Deduplicated union support of two measures with per-measure weights.

    ``points`` is ``(N, d)``, ``regimes`` is ``(N,)``; ``mu_w`` and ``nu_w``
    each sum to one. Pairwise distances are computed on demand by
    :meth:`distance_matrix` rather than stored, since the sparse solvers never
    need the dense matrix.
    """

    points: NDArray[np.float64]
    regimes: NDArray[np.int64]
    mu_w: NDArray[np.float64]
    nu_w: NDArray[np.float64]
    metric: HybridMetric

    @classmethod
    def from_measures(cls, mu: EmpiricalMeasure, nu: EmpiricalMeasure, metric: HybridMetric) -> FmProblem:
        if mu.d != nu.d:
            raise InputError(f"measures live in different dimensions ({mu.d} vs {nu.d})")
        rows = np.vstack([
            np.column_stack([mu.ys, mu.regimes.astype(np.float64)]),
            np.column_stack([nu.ys, nu.regimes.astype(np.float64)]),
        ])
        uniq, inv = np.unique(rows, axis=0, return_inverse=True)
        inv = inv.reshape(-1)
        n = uniq.shape[0]
        mu_w = np.bincount(inv[: len(mu)], weights=mu.weights, minlength=n)
        nu_w = np.bincount(inv[len(mu):], weights=nu.weights, minlength=n)
        return cls(uniq[:, :-1].copy(), uniq[:, -1].astype(np.int64), mu_w, nu_w, metric)

    @property
    def n_atoms(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def sigma(self) -> NDArray[np.float64]:
        return self.mu_w - self.nu_w

    def distance_matrix(self) -> NDArray[np.float64]:
        """Dense ``rho_c`` between all support points (symmetric, zero diagonal)."""
        p, r = self.points, self.regimes
        return np.asarray(self.metric.distance(p[:, None, :], r[:, None], p[None, :, :], r[None, :]))


def fm_problem(mu: EmpiricalMeasure, nu: EmpiricalMeasure, metric: HybridMetric) -> FmProblem:
    return FmProblem.from_measures(mu, nu, metric)


def fm_distance(p: FmProblem, method: str = "auto") -> float:
    """Exact FM distance.

    ``method`` is ``"auto"`` (path solver when it applies, else LP), ``"path"``
    or ``"lp"``.
    """
    if p.n_atoms < 1:
        raise InputError("empty support")
    if method not in ("auto", "path", "lp"):
        raise InputError(f"unknown method {method!r}")
    path_ok = p.d == 1 and p.metric.c >= 1
    if method == "path" and not path_ok:
        raise InputError("the path solver needs d = 1 and c >= 1")
    if p.n_atoms == 1:
        return 0.0
    if method == "path" or (method == "auto" and path_ok):
        val = _solve_paths(p)
    else:
        val = _solve_lp(p)
    return float(min(max(val, 0.0), 1.0))


def fm_between(mu: EmpiricalMeasure, nu: EmpiricalMeasure, metric: HybridMetric, method: str = "auto") -> float:
    return fm_distance(FmProblem.from_measures(mu, nu, metric), method)


# --- path solver --------------------------------------------------------------------


def _unit_scale(metric: HybridMetric) -> float:
    # rho_Y(u, v) = scale * |u - v| on the line
    if metric.base == "l1" and metric.weights is not None:
        return float(metric.weights[0])
    return 1.0


def _solve_paths(p: FmProblem) -> float:
    scale = _unit_scale(p.metric)
    sigma = p.sigma
    total = 0.0
    for reg in np.unique(p.regimes):
        sel = np.flatnonzero(p.regimes == reg)
        order = sel[np.argsort(p.points[sel, 0], kind="stable")]
        gaps = np.diff(p.points[order, 0]) * scale
        total += chain_max(sigma[order], gaps)
    return total


def chain_max(sigma: NDArray[np.float64], gaps: NDArray[np.float64]) -> float:
    """``max sum sigma_k f_k`` over ``f in [0,1]^n`` with ``|f_{k+1} - f_k| <= gaps_k``.

    Dynamic programming over ``V_k(f)``, the best partial objective given
    ``f_k = f``. Each ``V_k`` is concave and piecewise linear on ``[0, 1]`` and
    is stored as ``V_k(0)`` plus segments ``(length, slope)``; the increasing
    segments sit in a left deque and the rest in a right deque, both ordered
    left to right, with a shared slope offset so adding ``sigma_k f`` is O(1).

    The step ``V_k -> max_{|f'-f| <= g} V_k(f')`` removes ``g`` of length from
    the outer end of each side and inserts a flat piece at the peak.
    """
    sigma = np.ascontiguousarray(sigma, dtype=np.float64)
    gaps = np.ascontiguousarray(gaps, dtype=np.float64)
    if gaps.shape[0] != sigma.shape[0] - 1:
        raise InputError("need one gap per neighbouring pair")
    if sigma.shape[0] == 0:
        return 0.0
    return float(_chain_kernel(sigma, gaps))


@numba.njit(cache=True, nogil=True)
def _chain_kernel(sigma, gaps):  # pragma: no cover - compiled
    n = sigma.shape[0]
    cap = n + 2  # at most one new segment per step
    l_len = np.empty(cap)
    l_slp = np.empty(cap)
    r_len = np.empty(cap)
    r_slp = np.empty(cap)
    lh = 0  # ring buffers: head index and count
    lc = 0
    rh = 0
    rc = 0
    off = 0.0
    v0 = 0.0
    len_left = 0.0
    if sigma[0] > 0:
        l_len[0] = 1.0
        l_slp[0] = sigma[0]
        lc = 1
        len_left = 1.0
    else:
        r_len[0] = 1.0
        r_slp[0] = sigma[0]
        rc = 1
    for k in range(1, n):
        g = min(gaps[k - 1], 1.0)
        if g > 0:
            peak = len_left
            rem = g
            while rem > 0 and lc > 0:
                take = min(l_len[lh], rem)
                v0 += take * (l_slp[lh] + off)
                rem -= take
                if take >= l_len[lh]:
                    lh = (lh + 1) % cap
                    lc -= 1
                else:
                    l_len[lh] -= take
            len_left = max(len_left - g, 0.0)
            rem = g
            while rem > 0 and rc > 0:
                t = (rh + rc - 1) % cap
                if r_len[t] <= rem:
                    rem -= r_len[t]
                    rc -= 1
                else:
                    r_len[t] -= rem
                    rem = 0.0
            flat = min(peak, g) + min(1.0 - peak, g)
            if flat > 0:
                rh = (rh - 1) % cap
                r_len[rh] = flat
                r_slp[rh] = -off
                rc += 1
        off += sigma[k]
        while rc > 0 and r_slp[rh] + off > 0:
            t = (lh + lc) % cap
            l_len[t] = r_len[rh]
            l_slp[t] = r_slp[rh]
            lc += 1
            len_left += r_len[rh]
            rh = (rh + 1) % cap
            rc -= 1
        while lc > 0 and l_slp[(lh + lc - 1) % cap] + off <= 0:
            t = (lh + lc - 1) % cap
            rh = (rh - 1) % cap
            r_len[rh] = l_len[t]
            r_slp[rh] = l_slp[t]
            rc += 1
            len_left -= l_len[t]
            lc -= 1
        if lc == 0:
            len_left = 0.0
    total = v0
    for m in range(lc):
        t = (lh + m) % cap
        total += l_len[t] * (l_slp[t] + off)
    return total


# --- LP solver ----------------------------------------------------------------------


def _scaled_coords(p: FmProblem) -> tuple[NDArray[np.float64], float]:
    """Coordinates in which ``rho_Y`` is a Minkowski distance, and its order."""
    if p.metric.base == "euclidean":
        return p.points, 2.0
    w = np.ones(p.d) if p.metric.weights is None else np.asarray(p.metric.weights)
    if w.size != p.d:
        raise InputError(f"l1 weights have length {w.size}, states have d={p.d}")
    return p.points * w[None, :], 1.0


def constraint_pairs(p: FmProblem) -> tuple[NDArray[np.int64], NDArray[np.int64], NDArray[np.float64]]:
    """Pairs ``(k, l)`` with ``rho < 1`` that are not implied by other constraints."""
    c = p.metric.c
    regs = np.unique(p.regimes)
    groups = {int(r): np.flatnonzero(p.regimes == r) for r in regs}
    ks, ls = [], []
    if p.d == 1:
        x = p.points[:, 0]
        srt = {r: g[np.argsort(x[g], kind="stable")] for r, g in groups.items()}
        for g in srt.values():
            ks.append(g[:-1])
            ls.append(g[1:])
        if c < 1:
            # across regimes only the nearest atom on each side can bind
            for r1, r2 in itertools.permutations(srt, 2):
                g1, g2 = srt[r1], srt[r2]
                pos = np.searchsorted(x[g2], x[g1])
                for nb in (pos - 1, pos):
                    ok = (nb >= 0) & (nb < g2.size)
                    ks.append(g1[ok])
                    ls.append(g2[nb[ok]])
    else:
        coords, order = _scaled_coords(p)
        trees = {r: cKDTree(coords[g]) for r, g in groups.items()}
        for r1, r2 in itertools.combinations_with_replacement(trees, 2):
            radius = 1.0 if r1 == r2 else 1.0 - c
            if radius <= 0:
                continue
            m = trees[r1].sparse_distance_matrix(trees[r2], radius, p=order, output_type="coo_matrix")
            ks.append(groups[r1][m.row])
            ls.append(groups[r2][m.col])
    k = np.concatenate(ks) if ks else np.zeros(0, dtype=np.int64)
    l = np.concatenate(ls) if ls else np.zeros(0, dtype=np.int64)
    k, l = np.minimum(k, l), np.maximum(k, l)
    keep = k != l
    k, l = k[keep], l[keep]
    if k.size:
        kl = np.unique(np.column_stack([k, l]), axis=0)
        k, l = kl[:, 0], kl[:, 1]
    rho = np.asarray(p.metric.distance(p.points[k], p.regimes[k], p.points[l], p.regimes[l]), dtype=np.float64)
    keep = rho < 1
    return k[keep], l[keep], rho[keep]


def _solve_lp(p: FmProblem) -> float:
    n = p.n_atoms
    k, l, rho = constraint_pairs(p)
    m = k.size
    if m:
        rows = np.repeat(np.arange(2 * m), 2)
        cols = np.column_stack([k, l, l, k]).reshape(-1)
        vals = np.tile([1.0, -1.0], 2 * m)
        A = sparse.csr_matrix((vals, (rows, cols)), shape=(2 * m, n))
        b = np.repeat(rho, 2)
    else:
        A, b = None, None
    res = optimize.linprog(
        -p.sigma, A_ub=A, b_ub=b, bounds=(0.0, 1.0), method="highs",
        options={"primal_feasibility_tolerance": LP_TOL, "dual_feasibility_tolerance": LP_TOL},
    )
    if res.status != 0:
        raise InvariantViolation(f"LP solver failed: {res.message}")
    return -float(res.fun)


# --- brute-force oracle -------------------------------------------------------------


def fm_distance_oracle(p: FmProblem, step: float = ORACLE_STEP) -> float:
    """Grid search over ``f in {0, step, ..., 1}^N`` for ``N <= 4``.

    The objective is unchanged by adding a constant to ``f`` (the signed mass
    sums to zero), so some optimal grid point has a coordinate equal to 0. The
    search fixes that anchor, enumerates all but one of the remaining
    coordinates and sets the last one to the best feasible grid value in closed
    form. The result is at most ``step * sum|sigma|`` below the true value.
    """
    n = p.n_atoms
    if n > ORACLE_MAX_ATOMS:
        raise InputError(f"oracle handles at most {ORACLE_MAX_ATOMS} support points, got {n}")
    if n == 1:
        return 0.0
    sigma = p.sigma
    if abs(sigma.sum()) > 1e-9:
        raise InvariantViolation("signed mass does not sum to zero")
    rho = np.minimum(p.distance_matrix(), 1.0)
    m = int(round(1.0 / step))
    grid = np.arange(m + 1) * step
    best = 0.0
    for anchor in range(n):
        rest = [k for k in range(n) if k != anchor]
        free, last = rest[:-1], rest[-1]
        if free:
            mesh = np.meshgrid(*([grid] * len(free)), indexing="ij")
            f = {k: g.reshape(-1) for k, g in zip(free, mesh)}
        else:
            f = {}
        size = next(iter(f.values())).size if f else 1
        f[anchor] = np.zeros(size)
        ok = np.ones(size, dtype=bool)
        fixed = [anchor, *free]
        for a, b in itertools.combinations(fixed, 2):
            ok &= np.abs(f[a] - f[b]) <= rho[a, b] + 1e-12
        lo = np.zeros(size)
        hi = np.ones(size)
        for a in fixed:
            lo = np.maximum(lo, f[a] - rho[a, last])
            hi = np.minimum(hi, f[a] + rho[a, last])
        # snap the interval ends inward onto the grid
        lo = np.ceil(lo / step - 1e-9) * step
        hi = np.floor(hi / step + 1e-9) * step
        ok &= lo <= hi + 1e-12
        f[last] = hi if sigma[last] > 0 else lo
        obj = sum(sigma[k] * f[k] for k in range(n))
        if np.any(ok):
            best = max(best, float(obj[ok].max()))
    return best


__all__ = [
    "FmProblem", "fm_problem", "fm_distance", "fm_between", "fm_distance_oracle", "chain_max",
    "constraint_pairs",
]
