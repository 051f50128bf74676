"""Ergodicity constants, hypothesis checks, drift verification and rate estimation.

The constants follow the drift/contraction bookkeeping of the model:

    a = a_tilde lam L / (lam - alpha),
    b = a_tilde lam max_i int_0^inf exp(-lam t) rho(S_i(t, y*), y*) dt + b_tilde,
    R = 4 b / (1 - a),
    t0 = ln(lam / (lam - alpha)) / alpha      (1 / lam at alpha = 0),
    c_min = ((lam - alpha) / L) (M_L K_phi + M_L M_phi / lam) + 1,

with ``M_phi = sup_{t <= t0} phi(t)`` and ``M_L`` the supremum of the growth
function over the ball ``rho(y, y*) <= R``.

Rate fits use only the leading stretch of the curve that stays clear of Monte
Carlo noise: with ``floor_n = 3 SE_n`` a grid point enters the window while
``mean_n > 10 floor_n``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy import integrate

from .core import EmpiricalMeasure, HybridState, RngStream
from .coupling import coupled_process_batch, simulate_coupled_batch
from .errors import DomainError, InputError, WindowError
from .fm_distance import fm_between
from .jump import AdditiveBurstKernel, JumpRegularityCertificate, check_jump_hypotheses, jump_pair_sampler
from .pdmp import ModelSpec, apply_G_batch, apply_W_batch, process_snapshot, simulate_batch, step_batch
from .reports import ChecksReport, CheckResult, ConstantsReport, CorrespondenceReport, DistanceWithCI, RateEstimate
from .semiflow import (
    RATIO_TOL, AffineSemiflow, ExpSumPhi, FlowRegularityCertificate, K_phi, _take, check_A3, check_A4,
    divergence_sampler, pair_sampler, sup_phi,
)

MIN_FIT_POINTS = 5
FLOOR_SE = 3.0
WINDOW_FACTOR = 10.0
SAMPLED_SUP_INFLATION = 1.10
N_BOOTSTRAP = 200
QUAD_RTOL = 1e-10

JOINT_CONTINUITY = (
    "joint continuity of (y, t) -> J g(., t)(y) holds by construction for the built-in kernels "
    "(finite IFS with continuous probabilities; additive bursts)"
)


# --- constants ----------------------------------------------------------------------


def escape_integrals(model: ModelSpec) -> tuple[NDArray[np.float64], str]:
    """``int_0^inf exp(-lam t) rho(S_i(t, y*), y*) dt`` for every regime.

    Affine flows move ``y*`` by ``|1 - exp(alpha_i t)| rho(y*, r_i)``, which
    integrates to ``|1/lam - 1/(lam - alpha_i)| rho(y*, r_i)``; other flows use
    adaptive quadrature. Divergent integrals come back as ``inf``.
    """
    lam, metric, ystar = model.lam, model.metric, model.ystar
    flows = model.semiflows
    out = np.empty(flows.n_regimes)
    if isinstance(flows, AffineSemiflow):
        for i, (al, r) in enumerate(zip(flows.alphas, flows.fixed_points)):
            dist = float(metric.y_distance(ystar, r))
            if dist == 0:
                out[i] = 0.0
            elif al >= lam:
                out[i] = np.inf
            else:
                out[i] = abs(1.0 / lam - 1.0 / (lam - al)) * dist
        return out, "closed-form"
    for i in range(flows.n_regimes):
        def integrand(t: float, i: int = i) -> float:
            y = flows.flow_batch(np.array([i]), np.array([t]), ystar[None, :])[0]
            return math.exp(-lam * t) * float(metric.y_distance(y, ystar))

        try:
            val, _ = integrate.quad(integrand, 0.0, np.inf, epsrel=QUAD_RTOL, limit=200)
        except (OverflowError, FloatingPointError):
            val = np.inf
        out[i] = val if math.isfinite(val) else np.inf
    return out, "quadrature"


def t0_of(alpha: float, lam: float) -> float:
    """``ln(lam / (lam - alpha)) / alpha``, continuously extended by ``1/lam`` at 0."""
    if alpha == 0:
        return 1.0 / lam
    return -math.log1p(-alpha / lam) / alpha


def compute_constants(
    model: ModelSpec, flow_cert: FlowRegularityCertificate, jump_cert: JumpRegularityCertificate
) -> ConstantsReport:
    lam, alpha, L = float(model.lam), float(flow_cert.alpha), float(flow_cert.L)
    at, bt = float(jump_cert.a_tilde), float(jump_cert.b_tilde)
    if alpha >= lam:
        raise DomainError(f"alpha={alpha} >= lambda={lam}: a is undefined")
    if np.asarray(jump_cert.ystar).size != model.d or not np.allclose(jump_cert.ystar, model.ystar):
        raise InputError("jump certificate and model disagree on y*")
    flags: list[str] = []
    prov: dict[str, str] = {}
    a = at * lam * L / (lam - alpha)
    ints, prov["b"] = escape_integrals(model)
    if not np.all(np.isfinite(ints)):
        raise DomainError("the escape integral of y* diverges for some regime (A2 fails)")
    b = at * lam * float(ints.max()) + bt
    t0 = t0_of(alpha, lam)
    k_phi = K_phi(flow_cert, lam)
    prov["K_phi"] = "closed-form" if isinstance(flow_cert.phi, ExpSumPhi) else "quadrature"
    m_phi = sup_phi(flow_cert.phi, t0)
    prov["M_phi"] = "grid+bounded-search"
    hold = a < 1
    if hold:
        R = 4 * b / (1 - a)
        m_l, exact = flow_cert.Lfun.sup_on_ball(model.ystar, R, model.metric)
        if not exact:
            m_l *= SAMPLED_SUP_INFLATION
            flags.append("M_L is a sampled supremum (Halton nodes) inflated by 10%")
        prov["M_L"] = "closed-form" if exact else "sampled"
        c_min = (lam - alpha) / L * (m_l * k_phi + m_l * m_phi / lam) + 1
    else:
        R = m_l = c_min = math.inf
        flags.append("hypotheses violated: a >= 1 (a_tilde*L + alpha/lambda >= 1)")
    if not flow_cert.exact:
        flags.append("flow certificate is a valid but non-sharp bound")
    return ConstantsReport(
        a=a, b=b, R=R, M_L=m_l, M_phi=m_phi, K_phi=k_phi, t0=t0, c_min=c_min, a_tilde=at, b_tilde=bt,
        L=L, alpha=alpha, lam=lam, hypotheses_hold=hold, flags=flags, provenance=prov,
    )


# --- hypothesis checks ---------------------------------------------------------------


def check_A1(
    model: ModelSpec, cert: JumpRegularityCertificate, sampler: Iterable, n: int,
    rng: np.random.Generator | None = None, n_mc: int = 4000,
) -> CheckResult:
    """``E rho(Y', y*) <= a_tilde rho(y, y*) + b_tilde`` on ``n`` sampled ``y``.

    Finite IFS expectations, discrete bursts and exponential bursts in one
    dimension are exact; remaining burst expectations are Monte Carlo and get a
    ``3 SE`` allowance.
    """
    if n < 1:
        raise InputError("n must be >= 1")
    ys = np.array(_take(sampler, n), dtype=np.float64).reshape(n, -1)
    ystar = np.asarray(cert.ystar, dtype=np.float64)
    mean, se = model.jump.expected_distance_to(ys, ystar, model.metric, rng=rng, n_mc=n_mc)
    bound = cert.a_tilde * np.asarray(model.metric.y_distance(ys, ystar)) + cert.b_tilde
    excess = mean - bound - 3 * se
    worst = float(excess.max())
    caveats = ["Monte Carlo expectation with 3 SE slack"] if np.any(se > 0) else []
    return CheckResult(
        name="A1", passed=worst <= RATIO_TOL * (1 + float(bound.max())), worst=worst, threshold=0.0,
        slack=RATIO_TOL, n=n, caveats=caveats, detail={"max_se": float(se.max())},
    )


def check_A2_A5(model: ModelSpec) -> list[CheckResult]:
    """The escape integral of ``y*`` (A2) and a column of ``pi`` bounded away from 0 (A5)."""
    ints, how = escape_integrals(model)
    worst = float(ints.max())
    a2 = CheckResult(
        name="A2", passed=math.isfinite(worst), worst=worst, threshold=math.inf, slack=0.0, n=ints.size,
        caveats=[] if how == "closed-form" else ["adaptive quadrature"],
        detail={f"integral_{i}": float(v) for i, v in enumerate(ints)},
    )
    col_min = model.pi.min(axis=0)
    j0 = int(np.argmax(col_min))
    margin = float(col_min[j0])
    a5 = CheckResult(
        name="A5", passed=margin > 0, worst=margin, threshold=0.0, slack=0.0, n=model.pi.size,
        detail={"j0": float(j0)},
    )
    return [a2, a5]


def check_A6(
    model: ModelSpec, cert: JumpRegularityCertificate, sampler: Iterable, n: int
) -> CheckResult:
    """Sampled properties of the synchronous sub-coupling ``Q_J``.

    For pairs ``(y1, y2)`` checks ``int rho dQ_J <= a_tilde rho(y1, y2)``,
    ``Q_J(U(a_tilde rho)) >= eta`` and ``Q_J(Y^2) > 1 - l_tilde rho``. The
    marginal domination of ``Q_J`` holds by construction for both kernel
    families. ``worst`` is the largest violation ratio of the three.
    """
    pairs = _take(sampler, n)
    y1 = np.array([p[0] for p in pairs], dtype=np.float64).reshape(n, -1)
    y2 = np.array([p[1] for p in pairs], dtype=np.float64).reshape(n, -1)
    rho = np.asarray(model.metric.y_distance(y1, y2))
    keep = rho > 0
    kernel = model.jump
    caveats = ["marginal domination holds by construction", "infima over Y^2 are sampled"]
    if isinstance(kernel, AdditiveBurstKernel):
        # shared bursts translate both points: distance preserved, full mass
        mean_d, mass_near, mass = rho, np.full(n, 1.0 if cert.a_tilde >= 1 - RATIO_TOL else 0.0), np.ones(n)
    else:
        pmin = np.minimum(kernel.weights(y1), kernel.weights(y2))
        img_d = np.asarray(model.metric.y_distance(kernel.apply_all(y1), kernel.apply_all(y2)))
        mean_d = np.sum(pmin * img_d, axis=1)
        mass_near = np.sum(pmin * (img_d <= cert.a_tilde * rho[:, None] * (1 + RATIO_TOL)), axis=1)
        mass = pmin.sum(axis=1)
    r1 = np.where(keep, mean_d / np.where(keep, cert.a_tilde * rho, 1.0), 0.0)
    r2 = cert.eta / np.maximum(mass_near, 1e-300)
    deficit = 1 - mass
    r3 = np.where(keep, deficit / np.where(keep, cert.l_tilde * rho + 1e-300, 1.0), 0.0)
    worst = float(max(r1.max(initial=0), r2[keep].max(initial=0), r3.max(initial=0)))
    return CheckResult(
        name="A6", passed=worst <= 1 + RATIO_TOL, worst=worst, threshold=1.0, slack=RATIO_TOL, n=int(keep.sum()),
        caveats=caveats,
        detail={"q1_ratio": float(r1.max(initial=0)), "q2_ratio": float(r2[keep].max(initial=0)),
                "q3_ratio": float(r3.max(initial=0))},
    )


def run_checks(
    model: ModelSpec,
    flow_cert: FlowRegularityCertificate,
    jump_cert: JumpRegularityCertificate,
    box: tuple[float, float],
    seed: int,
    n: int = 2000,
) -> ChecksReport:
    """All hypothesis checks on samples drawn uniformly from ``box`` (per coordinate)."""
    lo, hi = box
    d, k = model.d, model.n_regimes
    s = RngStream(seed, 0, "checks")
    out: list[CheckResult] = []
    g = s.child(1, "A1").generator()
    out.append(check_A1(model, jump_cert, (y for y, _ in jump_pair_sampler(g, lo, hi, d)), n,
                        rng=s.child(2, "A1-mc").generator()))
    a2, a5 = check_A2_A5(model)
    out.append(a2)
    out.append(check_A3(model.semiflows, flow_cert, pair_sampler(s.child(3, "A3").generator(), lo, hi, d, k), n,
                        model.metric))
    out.append(check_A4(model.semiflows, flow_cert, divergence_sampler(s.child(4, "A4").generator(), lo, hi, d, k),
                        n, model.metric))
    out.append(a5)
    out.append(check_A6(model, jump_cert, jump_pair_sampler(s.child(5, "A6").generator(), lo, hi, d), n))
    out.extend(check_jump_hypotheses(model.jump, jump_cert, jump_pair_sampler(s.child(6, "ifs").generator(), lo, hi, d),
                                     n, model.metric))
    return ChecksReport(checks=out)


# --- Lyapunov drift -----------------------------------------------------------------


def lyapunov_test_points(model: ModelSpec, box: tuple[float, float], n: int = 20) -> list[HybridState]:
    """``n`` points spread evenly along the diagonal of ``box``, regimes cycling."""
    lo, hi = box
    t = np.linspace(lo, hi, n)
    return [HybridState(np.full(model.d, v), k % model.n_regimes) for k, v in enumerate(t)]


def lyapunov_check(
    model: ModelSpec,
    constants: ConstantsReport,
    points: Sequence[HybridState],
    n_samples: int,
    rng: np.random.Generator,
    a: float | None = None,
    b: float | None = None,
) -> CheckResult:
    """Monte Carlo test of ``E[V(Phi_1) | Phi_0 = x] <= a V(x) + b`` at each point.

    A point passes when its estimate is at most the bound plus ``3 SE``.
    ``a`` and ``b`` default to the reported constants.
    """
    if n_samples < 2:
        raise InputError("n_samples must be >= 2")
    a = constants.a if a is None else a
    b = constants.b if b is None else b
    ystar = model.ystar
    excess = np.empty(len(points))
    ses = np.empty(len(points))
    for k, x in enumerate(points):
        y1, _, _ = step_batch(model, np.repeat(x.y[None, :], n_samples, axis=0), np.full(n_samples, x.i), rng)
        v = np.asarray(model.metric.y_distance(y1, ystar))
        mean, se = float(v.mean()), float(v.std(ddof=1) / math.sqrt(n_samples))
        bound = a * float(model.metric.y_distance(x.y, ystar)) + b
        excess[k] = mean - bound - 3 * se
        ses[k] = se
    worst = float(excess.max())
    return CheckResult(
        name="lyapunov", passed=worst <= 1e-12, worst=worst, threshold=0.0, slack=0.0,
        n=len(points) * n_samples, detail={"a": a, "b": b, "max_se": float(ses.max())},
    )


# --- rate estimation ----------------------------------------------------------------


def fit_decay(grid: NDArray, samples: NDArray, kind: str) -> RateEstimate:
    """Log-linear fit of the mean of ``samples`` (shape ``(m, len(grid))``).

    ``kind="chain"`` reports ``q = exp(slope)``, ``kind="process"`` reports
    ``gamma = -slope``.
    """
    grid = np.asarray(grid, dtype=np.float64)
    m = samples.shape[0]
    mean = samples.mean(axis=0)
    se = samples.std(axis=0, ddof=1) / math.sqrt(m) if m > 1 else np.full(grid.size, np.inf)
    floor = FLOOR_SE * se
    ok = (mean > WINDOW_FACTOR * floor) & (mean > 0)
    w = grid.size if ok.all() else int(np.argmin(ok))
    if w < MIN_FIT_POINTS:
        raise WindowError(
            f"only {w} grid points lie above {WINDOW_FACTOR:g}x the noise floor (need {MIN_FIT_POINTS}); "
            "increase the initial separation or the number of samples"
        )
    x, y = grid[:w], np.log(mean[:w])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    rate = math.exp(slope) if kind == "chain" else -slope
    return RateEstimate(
        kind=kind, rate=float(rate), slope=float(slope), intercept=float(intercept), r_squared=r2,
        n_points=w, n_samples=m, noise_floor=floor.tolist(), grid=grid.tolist(), mean=mean.tolist(),
        se=se.tolist(), window=[float(x[0]), float(x[-1])],
    )


def _pair_arrays(model: ModelSpec, x1: HybridState, x2: HybridState, m: int):
    return (np.repeat(x1.y[None, :], m, axis=0), np.full(m, x1.i),
            np.repeat(x2.y[None, :], m, axis=0), np.full(m, x2.i))


def chain_contraction_curve(
    model: ModelSpec, x1: HybridState, x2: HybridState, n_steps: int, n_samples: int,
    rng: np.random.Generator, identify: bool = False,
) -> NDArray[np.float64]:
    """``rho_bar`` of coupled chains, shape ``(n_samples, n_steps + 1)``."""
    batch = simulate_coupled_batch(model, *_pair_arrays(model, x1, x2, n_samples), n_steps, rng)
    return batch.rho_bar(model, identify)


def estimate_chain_contraction(
    model: ModelSpec,
    x1: HybridState,
    x2: HybridState,
    n_steps: int,
    n_samples: int,
    rng: np.random.Generator,
    identify: bool = False,
) -> RateEstimate:
    """Fit ``q`` in ``E rho_bar(Phi_n^1, Phi_n^2) ~ C q^n`` over ``n = 1..n_steps``."""
    if n_steps < MIN_FIT_POINTS:
        raise InputError(f"n_steps must be >= {MIN_FIT_POINTS}")
    rb = chain_contraction_curve(model, x1, x2, n_steps, n_samples, rng, identify)
    return fit_decay(np.arange(1, n_steps + 1), rb[:, 1:], "chain")


def process_decay_curve(
    model: ModelSpec, x1: HybridState, x2: HybridState, t_grid: Sequence[float], n_samples: int,
    rng: np.random.Generator, identify: bool = True,
) -> NDArray[np.float64]:
    """``rho_bar(Psi^1(t), Psi^2(t))`` on ``t_grid``, shape ``(n_samples, len(t_grid))``."""
    t_grid = np.asarray(t_grid, dtype=np.float64)
    batch = simulate_coupled_batch(model, *_pair_arrays(model, x1, x2, n_samples), None, rng,
                                   until=float(t_grid.max()))
    ys1, i1, ys2, i2 = coupled_process_batch(model, batch, t_grid, identify)
    return np.asarray(model.metric.truncated(ys1, i1, ys2, i2))


def estimate_process_decay(
    model: ModelSpec,
    x1: HybridState,
    x2: HybridState,
    t_grid: Sequence[float],
    n_samples: int,
    rng: np.random.Generator,
    identify: bool = True,
) -> RateEstimate:
    """Fit ``gamma`` in ``E rho_bar(Psi^1(t), Psi^2(t)) ~ C exp(-gamma t)``."""
    rb = process_decay_curve(model, x1, x2, t_grid, n_samples, rng, identify)
    return fit_decay(np.asarray(t_grid, dtype=np.float64), rb, "process")


# --- invariant correspondence -------------------------------------------------------


def stationary_chain_sample(model: ModelSpec, x0: HybridState, burn_in: int, n: int, rng) -> EmpiricalMeasure:
    """``n`` independent chains run ``burn_in`` steps from ``x0``."""
    batch = simulate_batch(model, np.repeat(x0.y[None, :], n, axis=0), np.full(n, x0.i), burn_in, rng)
    return EmpiricalMeasure(batch.ys[:, -1], batch.regimes[:, -1])


def stationary_process_sample(model: ModelSpec, x0: HybridState, T: float, n: int, rng) -> EmpiricalMeasure:
    """``Psi(T)`` of ``n`` independent processes started at ``x0``."""
    ys, reg = process_snapshot(model, np.repeat(x0.y[None, :], n, axis=0), np.full(n, x0.i), T, rng)
    return EmpiricalMeasure(ys, reg)


def _with_ci(point: float, boot: NDArray) -> DistanceWithCI:
    lo, hi = np.quantile(boot, [0.025, 0.975])
    return DistanceWithCI(value=point, ci_low=float(lo), ci_high=float(hi))


def invariant_correspondence_test(
    model: ModelSpec,
    burn_in: int,
    n_stat: int,
    T: float,
    n_samples: int,
    seed: int,
    x0: HybridState | None = None,
    n_boot: int = N_BOOTSTRAP,
    workers: int | None = None,
) -> CorrespondenceReport:
    """Compare ``mu_Phi G`` with ``mu_Psi`` and ``mu_Psi W`` with ``mu_Phi``.

    ``mu_Phi`` is built from ``n_stat`` chains after ``burn_in`` steps and
    ``mu_Psi`` from ``n_samples`` process snapshots at time ``T``. Both FM
    distances get percentile bootstrap 95% intervals. The noise floor of each
    measure is the bootstrap mean of the distance between two independent
    resamples of it, which mimics two independent samples of the same size; a
    single self-distance draw is too variable to serve as a yardstick.
    """
    x0 = x0 or HybridState(model.ystar, 0)
    root = RngStream(seed, 0, "correspondence")
    g = lambda k, p: root.child(k, p).generator()  # noqa: E731
    metric = model.metric
    mu_phi = stationary_chain_sample(model, x0, burn_in, n_stat, g(1, "phi"))
    mu_psi = stationary_process_sample(model, x0, T, n_samples, g(2, "psi"))
    ys, reg = apply_G_batch(model, mu_phi.ys, mu_phi.regimes, g(3, "G"))
    phi_g = EmpiricalMeasure(ys, reg)
    ys, reg = apply_W_batch(model, mu_psi.ys, mu_psi.regimes, g(4, "W"))
    psi_w = EmpiricalMeasure(ys, reg)

    def boot(b: int) -> tuple[float, float, float, float]:
        r = RngStream(seed, b, "bootstrap").generator()
        d1 = fm_between(phi_g.resample(r), mu_psi.resample(r), metric)
        d2 = fm_between(psi_w.resample(r), mu_phi.resample(r), metric)
        s_phi = fm_between(mu_phi.resample(r), mu_phi.resample(r), metric)
        s_psi = fm_between(mu_psi.resample(r), mu_psi.resample(r), metric)
        return d1, d2, s_phi, s_psi

    workers = workers or os.cpu_count() or 1
    with ThreadPoolExecutor(max_workers=workers) as pool:
        draws = np.array(list(pool.map(boot, range(n_boot))))
    return CorrespondenceReport(
        fm_phi_g_vs_psi=_with_ci(fm_between(phi_g, mu_psi, metric), draws[:, 0]),
        fm_psi_w_vs_phi=_with_ci(fm_between(psi_w, mu_phi, metric), draws[:, 1]),
        self_distance_phi=float(draws[:, 2].mean()),
        self_distance_psi=float(draws[:, 3].mean()),
        n_stat=n_stat, n_samples=n_samples, burn_in=burn_in, T=float(T),
        assumptions=[JOINT_CONTINUITY],
    )


# --- stationary moments -------------------------------------------------------------


def stationary_regime_law(pi: NDArray[np.float64]) -> NDArray[np.float64]:
    """Left eigenvector of ``pi`` for eigenvalue 1, normalised (assumes uniqueness)."""
    k = pi.shape[0]
    A = np.vstack([pi.T - np.eye(k), np.ones((1, k))])
    rhs = np.zeros(k + 1)
    rhs[-1] = 1.0
    p, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    return p


def stationary_mean(model: ModelSpec) -> NDArray[np.float64]:
    """Stationary mean of ``Y`` for affine flows with additive bursts.

    With ``m_i = E[Y; regime i]`` and regime law ``p`` the first-moment
    equations read

        0 = alpha_i (m_i - r_i p_i) - lam m_i + lam sum_j pi_ji (m_j + beta e p_j),

    solved per coordinate.
    """
    flows, jump = model.semiflows, model.jump
    if not isinstance(flows, AffineSemiflow) or not isinstance(jump, AdditiveBurstKernel):
        raise InputError("closed-form stationary mean needs affine flows and additive bursts")
    lam, pi = model.lam, model.pi
    p = stationary_regime_law(pi)
    al = flows.alphas
    A = np.diag(al - lam) + lam * pi.T
    jump_mean = jump.burst_mean * np.asarray(jump.direction, dtype=np.float64)
    out = np.zeros(model.d)
    for c in range(model.d):
        rhs = al * flows.fixed_points[:, c] * p - lam * (pi.T @ (jump_mean[c] * p))
        m = np.linalg.solve(A, rhs)
        out[c] = m.sum()
    return out


__all__ = [
    "escape_integrals", "t0_of", "compute_constants", "check_A1", "check_A2_A5", "check_A6", "run_checks",
    "lyapunov_test_points", "lyapunov_check", "fit_decay", "chain_contraction_curve", "estimate_chain_contraction",
    "process_decay_curve", "estimate_process_decay", "stationary_chain_sample", "stationary_process_sample",
    "invariant_correspondence_test", "stationary_regime_law", "stationary_mean",
]
