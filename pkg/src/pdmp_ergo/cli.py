"""Command-line front end: ``pdmp-ergo run <config>`` and ``pdmp-ergo validate <config>``.

Exit codes: 0 on success, 2 when hypothesis checks ran and some failed, 1 on
configuration or internal errors. ``report.json`` is a pure function of the
config and seed; timestamps go to ``metadata.json``.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import os
import sys
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .analysis import (
    compute_constants, fit_decay, invariant_correspondence_test, lyapunov_check, lyapunov_test_points,
    process_decay_curve, run_checks,
)
from .core import EmpiricalMeasure, RngStream
from .coupling import simulate_coupled_batch, write_trace_csv
from .errors import PdmpError, WindowError
from .fm_distance import fm_between
from .models import Preset
from .pdmp import read_trajectories_csv, simulate_chain_from, slice_measure, write_trajectories_csv
from .reports import RateEstimate, RunReport
from .config import RunConfig, build_model, load_config, start_pair

OUTPUT_ENV = "PDMP_ERGO_OUTPUT_DIR"


class CheckFailure(Exception):
    """Hypothesis checks ran and at least one failed."""


class Runner:
    def __init__(self, cfg: RunConfig, preset: Preset, outdir: Path, config_path: str):
        self.cfg = cfg
        self.preset = preset
        self.model = preset.model
        self.outdir = outdir
        self.config_path = config_path
        self.files: list[str] = []
        self.report = RunReport(experiment=cfg.experiment, model=self.model.name, seed=cfg.budget.seed)

    # -- helpers --------------------------------------------------------------

    def rng(self, purpose: str) -> np.random.Generator:
        return RngStream(self.cfg.budget.seed, 0, purpose).generator()

    def want(self, fmt: str) -> bool:
        return fmt in self.cfg.output.formats

    def path(self, name: str) -> Path:
        self.files.append(name)
        return self.outdir / name

    def write_rate_csv(self, name: str, est: RateEstimate) -> None:
        if not self.want("csv"):
            return
        with open(self.path(name), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "mean_rho_bar", "se"])
            for t, m, s in zip(est.grid, est.mean, est.se):
                w.writerow([repr(float(t)), repr(float(m)), repr(float(s))])

    # -- experiments ----------------------------------------------------------

    def constants(self) -> None:
        p = self.preset
        self.report.constants = compute_constants(self.model, p.flow_cert, p.jump_cert)
        self.report.values["c"] = float(self.model.metric.c)

    def check(self) -> None:
        b = self.cfg.budget
        p = self.preset
        checks = run_checks(self.model, p.flow_cert, p.jump_cert, p.box, b.seed, b.check_samples)
        const = self.report.constants or compute_constants(self.model, p.flow_cert, p.jump_cert)
        pts = lyapunov_test_points(self.model, p.box, b.lyapunov_points)
        lyap = lyapunov_check(self.model, const, pts, b.n_samples, self.rng("lyapunov"))
        self.report.checks = [*checks.checks, lyap]
        failed = [c for c in self.report.checks if not c.passed]
        if failed:
            msg = "; ".join(f"{c.name} failed (worst={c.worst:.6g}, threshold={c.threshold:.6g})" for c in failed)
            raise CheckFailure(f"hypothesis check failed: {msg}")

    def simulate(self) -> None:
        b = self.cfg.budget
        x0, _ = start_pair(self.cfg, self.model)
        batch = simulate_chain_from(self.model, x0, b.n_samples, b.n_steps, self.rng("simulate"))
        self.report.values["mean_y0_final"] = float(batch.ys[:, -1, 0].mean())
        self.report.values["mean_tau_final"] = float(batch.taus[:, -1].mean())
        if self.want("csv"):
            write_trajectories_csv(self.path("trajectories.csv"), batch)

    def couple(self) -> None:
        b = self.cfg.budget
        x1, x2 = start_pair(self.cfg, self.model)
        m = b.n_samples
        batch = simulate_coupled_batch(
            self.model, np.repeat(x1.y[None], m, 0), x1.i, np.repeat(x2.y[None], m, 0), x2.i, b.n_steps,
            self.rng("couple"),
        )
        if self.want("csv"):
            write_trace_csv(self.path("coupled_trace.csv"), self.model, batch.trace(0))
        kappa = batch.kappa
        self.report.values["kappa_finite_fraction"] = float(np.mean(kappa >= 0))
        self.report.values["q_branch_fraction"] = float(batch.q_branch.mean()) if batch.q_branch.size else 1.0
        rb = batch.rho_bar(self.model)
        est = fit_decay(np.arange(1, b.n_steps + 1), rb[:, 1:], "chain")
        self.report.rates["chain"] = est
        self.report.values["q_hat"] = est.rate
        self.write_rate_csv("rate_fit_chain.csv", est)

    def process_decay(self) -> None:
        b = self.cfg.budget
        x1, x2 = start_pair(self.cfg, self.model)
        rb = process_decay_curve(self.model, x1, x2, b.t_grid, b.process_samples, self.rng("process"))
        est = fit_decay(np.asarray(b.t_grid), rb, "process")
        self.report.rates["process"] = est
        self.report.values["gamma_hat"] = est.rate
        self.write_rate_csv("rate_fit_process.csv", est)

    def correspond(self) -> None:
        b = self.cfg.budget
        x0, _ = start_pair(self.cfg, self.model)
        rep = invariant_correspondence_test(
            self.model, b.burn_in, b.n_samples, b.T, b.n_samples, b.seed, x0=x0, n_boot=b.n_boot,
            workers=self.cfg.workers,
        )
        self.report.correspondence = rep
        self.report.values["fm_phi_g_vs_psi"] = rep.fm_phi_g_vs_psi.value
        self.report.values["fm_psi_w_vs_phi"] = rep.fm_psi_w_vs_phi.value

    def fm(self) -> None:
        spec = self.cfg.fm
        assert spec is not None
        mu_cols = read_trajectories_csv(spec.mu)
        nu_cols = read_trajectories_csv(spec.nu)
        mu = EmpiricalMeasure(*slice_measure(mu_cols, spec.column, spec.mu_value))
        nu = EmpiricalMeasure(*slice_measure(nu_cols, spec.column, spec.nu_value))
        self.report.values["fm_distance"] = fm_between(mu, nu, self.model.metric)
        self.report.values["n_mu"] = float(len(mu))
        self.report.values["n_nu"] = float(len(nu))

    def full_report(self) -> None:
        self.constants()
        if not self.report.constants.hypotheses_hold:
            raise CheckFailure("hypothesis check failed: A3 (a_tilde*L + alpha/lambda >= 1)")
        self.check()
        self.couple()
        self.process_decay()
        self.correspond()

    # -- driver ---------------------------------------------------------------

    def run(self) -> int:
        steps: dict[str, Callable[[], None]] = {
            "constants": self.constants, "check": self.check, "simulate": self.simulate, "couple": self.couple,
            "fm": self.fm, "correspond": self.correspond, "full-report": self.full_report,
        }
        code = 0
        try:
            steps[self.cfg.experiment]()
        except CheckFailure as exc:
            self.report.status = "check-failed"
            self.report.messages.append(str(exc))
            print(str(exc), file=sys.stderr)
            code = 2
        except WindowError as exc:
            self.report.status = "error"
            self.report.messages.append(f"rate fit failed: {exc}")
            print(f"error: rate fit failed: {exc}", file=sys.stderr)
            code = 1
        finally:
            self.finish()
        return code

    def finish(self) -> None:
        if self.want("json"):
            self.path("report.json").write_text(self.report.to_json() + "\n")
        meta = {
            "created": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            "version": __version__,
            "config": self.config_path,
            "files": self.files,
        }
        (self.outdir / "metadata.json").write_text(json.dumps(meta, indent=2) + "\n")


def output_dir(cfg: RunConfig) -> Path:
    return Path(os.environ.get(OUTPUT_ENV) or cfg.output.directory)


def cmd_run(path: str) -> int:
    try:
        cfg = load_config(path)
        preset = build_model(cfg)
        outdir = output_dir(cfg)
        outdir.mkdir(parents=True, exist_ok=True)
    except (PdmpError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        code = Runner(cfg, preset, outdir, path).run()
    except (PdmpError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if code == 0:
        print(f"ok: {cfg.experiment} finished; artifacts in {outdir}")
    return code


def cmd_validate(path: str) -> int:
    try:
        cfg = load_config(path)
        preset = build_model(cfg)
        const = compute_constants(preset.model, preset.flow_cert, preset.jump_cert)
    except PdmpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    c = preset.model.metric.c
    warnings = []
    if not const.hypotheses_hold:
        warnings.append(
            f"a_tilde*L + alpha/lambda = {const.a_tilde * const.L + const.alpha / const.lam:.6g} is not below 1"
        )
    if c < const.c_min:
        warnings.append(
            f"c = {c:g} is below the lower bound c_min = ((lambda-alpha)/L)(M_L K_phi + M_L M_phi/lambda) + 1"
            f" = {const.c_min:.6g}"
        )
    for w in warnings:
        print(f"warning: {w}")
    print("ok")
    print(f"c_min = {const.c_min:.12g}")
    print(f"c = {c:.12g}")
    print(f"a = {const.a:.12g}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="pdmp-ergo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run the experiment named in a config file")
    p_run.add_argument("config")
    p_val = sub.add_parser("validate", help="check a config without running it")
    p_val.add_argument("config")
    args = parser.parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config)
    return cmd_validate(args.config)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
