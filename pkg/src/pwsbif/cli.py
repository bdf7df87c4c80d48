"""Command-line harness: configuration, studies, and serialization.

Subcommands drive every study in the package and write machine-readable
CSV (17 significant digits, deterministic byte-for-byte) plus static SVG
plots.  Run metadata (config hash, timings) goes to a sidecar JSON so the
data files stay reproducible.

Exit codes: 0 success, 1 criterion/check failure, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import applications, bifurcation, blowup, dynamics, filippov, normalform, regfun
from .errors import (
    BudgetError,
    ConfigurationError,
    DetectionError,
    ExpressionParseError,
    PwsbifError,
    StiffnessError,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

EPS_RANGE = (3e-5, 1e-2)


# ---------------------------------------------------------------------------
# Config file: flat "dotted.key = value" lines, '#' comments, UTF-8
# ---------------------------------------------------------------------------

def parse_config_text(text: str) -> dict:
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigurationError(f"config line {lineno}: empty key")
        out[key] = value.strip()
    return out


def load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    return parse_config_text(Path(path).read_text(encoding="utf-8"))


class Config:
    """Typed access over the flat key/value map."""

    def __init__(self, data: dict):
        self.data = dict(data)

    def get(self, key: str, default=None) -> Optional[str]:
        return self.data.get(key, default)

    def get_float(self, key: str, default: Optional[float] = None) -> Optional[float]:
        raw = self.data.get(key)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            raise ConfigurationError(f"config key {key}: expected a number, got {raw!r}") from None

    def get_int(self, key: str, default: Optional[int] = None) -> Optional[int]:
        raw = self.data.get(key)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise ConfigurationError(f"config key {key}: expected an integer, got {raw!r}") from None

    def get_bool(self, key: str, default: bool = False) -> bool:
        raw = self.data.get(key)
        if raw is None:
            return default
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigurationError(f"config key {key}: expected a boolean, got {raw!r}")

    def get_floats(self, key: str, default: Sequence[float] = ()) -> list:
        raw = self.data.get(key)
        if raw is None:
            return list(default)
        try:
            return [float(tok) for tok in raw.replace(",", " ").split()]
        except ValueError:
            raise ConfigurationError(f"config key {key}: expected numbers, got {raw!r}") from None

    def hash(self) -> str:
        blob = json.dumps(self.data, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def make_reg(cfg: Config) -> regfun.RegularizationFunction:
    name = cfg.get("reg.name", "sqrt_sigmoid")
    expr = cfg.get("reg.expression")
    if expr is not None:
        k = cfg.get_int("reg.k")
        beta = cfg.get_float("reg.beta")
        if k is None or beta is None:
            raise ConfigurationError("user regularizations need declared reg.k and reg.beta")
        odd = cfg.get_bool("reg.odd_symmetric", False)
        return regfun.make_from_expression(expr, k=k, beta=beta, name=name, odd_symmetric=odd)
    return regfun.make_builtin(name)


def check_eps_values(cfg: Config, eps_values: Sequence[float]):
    if cfg.get_bool("sweep.allow_extreme_eps", False):
        return
    for eps in eps_values:
        if not EPS_RANGE[0] <= eps <= EPS_RANGE[1]:
            raise ConfigurationError(
                f"eps = {eps:g} outside the supported range [{EPS_RANGE[0]:g}, {EPS_RANGE[1]:g}]"
                " (set sweep.allow_extreme_eps = true to override)"
            )


def make_normal_form(cfg: Config) -> normalform.NormalFormParams:
    return normalform.NormalFormParams(
        tau=cfg.get_float("system.normalform.tau", 1.0),
        delta=cfg.get_float("system.normalform.delta", 1.0),
        gamma=cfg.get_float("system.normalform.gamma", -1.0),
        sign_lower=cfg.get_int("system.normalform.sign_lower", 1),
        mu_plus=cfg.get_float("system.normalform.mu_plus", 0.5),
    )


def make_gause(cfg: Config) -> applications.GauseParams:
    return applications.GauseParams(
        r=cfg.get_float("system.gause.r", 1.0),
        lam=cfg.get_float("system.gause.lambda", 1.0),
        h=cfg.get_float("system.gause.h", 0.5),
        m=cfg.get_float("system.gause.m", 0.2),
        e_tilde=cfg.get_float("system.gause.e_tilde", 0.5),
        mu=cfg.get_float("system.gause.mu", 0.2),
    )


def make_stickslip(cfg: Config) -> applications.StickSlipParams:
    return applications.StickSlipParams(
        mu_s=cfg.get_float("system.stickslip.mu_s", 1.0),
        mu_m=cfg.get_float("system.stickslip.mu_m", 0.5),
        v_m=cfg.get_float("system.stickslip.v_m", 1.0),
        alpha=cfg.get_float("system.stickslip.alpha", 0.5),
    )


# ---------------------------------------------------------------------------
# Output writers
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, float):
        return "%.16e" % v  # 17 significant digits
    return str(v)


def write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_sidecar(path: Path, cfg: Config, extra: dict) -> None:
    meta = {"config_hash": cfg.hash(), "config": cfg.data, "created": time.strftime("%Y-%m-%dT%H:%M:%S")}
    meta.update(extra)
    path.write_text(json.dumps(meta, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")


def write_svg_lines(path: Path, curves: list, cfg: Config, *, xlabel: str, ylabel: str,
                    title: str, logx: bool = False, logy: bool = False) -> None:
    """Static multi-curve line plot; the config hash rides in the metadata."""
    import matplotlib
    matplotlib.use("svg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": cfg.hash()}):
        fig, ax = plt.subplots(figsize=(6.0, 4.2))
        for label, xs, ys, style in curves:
            ax.plot(xs, ys, style, label=label)
        if logx:
            ax.set_xscale("log")
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        if curves:
            ax.legend(loc="best", fontsize=8)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        fig.savefig(path, metadata={"Description": f"config-hash:{cfg.hash()}", "Date": None})
        plt.close(fig)


def run_parallel(tasks, threads: int):
    """Evaluate a list of thunks, preserving order; threads > 1 uses a pool."""
    if threads <= 1:
        return [t() for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(t) for t in tasks]
        return [f.result() for f in futures]


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_validate_reg(cfg: Config, out: Path, args) -> int:
    try:
        reg = make_reg(cfg)
    except ExpressionParseError as exc:
        print(f"expression parse error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report = regfun.validate_regularization(reg)
    payload = {
        "name": report.name,
        "passed": report.passed,
        "min_deriv": report.min_deriv,
        "monotone_ok": report.monotone_ok,
        "monotone_violations": list(report.monotone_violations[:20]),
        "left_residual": report.left_residual,
        "right_residual": report.right_residual,
        "k_fit": report.k_fit,
        "beta_fit": report.beta_fit,
        "k_ok": report.k_ok,
        "beta_ok": report.beta_ok,
        "messages": list(report.messages),
    }
    out.mkdir(parents=True, exist_ok=True)
    (out / "validate_reg.json").write_text(json.dumps(payload, indent=2, default=str) + "\n")
    print(json.dumps(payload, indent=2, default=str))
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def _system_pws(cfg: Config):
    system = cfg.get("system", "normalform")
    if system == "gause":
        p = make_gause(cfg)
        return applications.gause_pws(p), cfg.get_float("system.gause.mu", p.mu), (0.05, 1.0)
    if system == "stickslip":
        p = make_stickslip(cfg)
        return applications.stickslip_pws(p), cfg.get_float("system.stickslip.alpha", p.alpha), (-0.2, 0.6)
    if system == "normalform":
        p = make_normal_form(cfg)
        return normalform.pws_limit(p), cfg.get_float("system.normalform.mu", 0.1), (-0.3, 0.3)
    raise ConfigurationError(f"unknown system {system!r}")


def cmd_pws_report(cfg: Config, out: Path, args) -> int:
    sys_pws, alpha, bf_window = _system_pws(cfg)
    lo = cfg.get_float("report.x_min", sys_pws.domain[0][0])
    hi = cfg.get_float("report.x_max", sys_pws.domain[0][1])
    folds = filippov.find_folds(sys_pws, (lo, hi), alpha)
    eqs = filippov.sliding_equilibria(sys_pws, alpha, (lo, hi))
    a_lo = cfg.get_float("report.alpha_min", bf_window[0])
    a_hi = cfg.get_float("report.alpha_max", bf_window[1])
    bf = filippov.detect_bf(sys_pws, (a_lo, a_hi))

    xs = np.linspace(lo, hi, 201)
    segs = [(float(x), filippov.classify_point(sys_pws, float(x), alpha)) for x in xs]
    payload = {
        "system": cfg.get("system", "normalform"),
        "parameter": alpha,
        "folds": [{"x": f.x, "visibility": f.visibility, "side": f.side} for f in folds],
        "sliding_equilibria": [{"x": x, "stability": s} for x, s in eqs],
        "classification_grid": segs,
        "bf": None if bf is None else {
            "x": bf.x, "alpha": bf.alpha,
            "eigenvalues": [str(bf.eigenvalues[0]), str(bf.eigenvalues[1])],
            "determinant_condition": bf.determinant_condition,
            "sliding_derivative": bf.sliding_derivative,
            "classification": bf.classification,
        },
    }
    out.mkdir(parents=True, exist_ok=True)
    (out / "pws_report.json").write_text(json.dumps(payload, indent=2, default=str) + "\n")
    print(json.dumps({k: v for k, v in payload.items() if k != "classification_grid"},
                     indent=2, default=str))
    return EXIT_OK


def cmd_desing_diagram(cfg: Config, out: Path, args) -> int:
    ks = [int(v) for v in cfg.get_floats("diagram.k_list", [1, 3, 5])]
    beta = cfg.get_float("diagram.beta", 1.0)
    tau = cfg.get_float("diagram.tau", 1.0)
    delta = cfg.get_float("diagram.delta", 1.0)
    g_lo = cfg.get_float("diagram.gamma_min", -2.0)
    g_hi = cfg.get_float("diagram.gamma_max", 0.999 * delta / tau)
    n = cfg.get_int("diagram.gamma_steps", 81)
    with_hom = cfg.get_bool("diagram.homoclinic", False)
    gammas = np.linspace(g_lo, g_hi, n)

    out.mkdir(parents=True, exist_ok=True)
    rows = []
    curves = []
    for k in ks:
        diag = bifurcation.build_diagram(k, beta, tau, delta, gammas, with_homoclinic=with_hom)
        for g, m in diag.ah_curve:
            rows.append((k, "ah", g, m))
        for g, m in diag.sn_curve:
            rows.append((k, "sn", g, m))
        for g, m in diag.hom_samples:
            rows.append((k, "hom", g, m))
        rows.append((k, "bt", diag.bt_point[1], diag.bt_point[0]))
        curves.append((f"onset k={k}", [g for g, _ in diag.ah_curve], [m for _, m in diag.ah_curve], "-"))
        if diag.sn_curve:
            curves.append((f"fold k={k}", [g for g, _ in diag.sn_curve], [m for _, m in diag.sn_curve], "--"))
        if diag.hom_samples:
            curves.append((f"connection k={k}", [g for g, _ in diag.hom_samples], [m for _, m in diag.hom_samples], ":"))
    write_csv(out / "desing_diagram.csv",
              ["k [1]", "curve [name]", "gamma [1]", "mu_hat [1]"], rows)
    write_svg_lines(out / "desing_diagram.svg", curves, cfg,
                    xlabel="gamma", ylabel="mu_hat = mu / eps^(k/(k+1))",
                    title="bifurcation curves of the collision unfolding")
    write_sidecar(out / "desing_diagram.meta.json", cfg, {"rows": len(rows)})
    print(f"wrote {out / 'desing_diagram.csv'} ({len(rows)} rows)")
    return EXIT_OK


def _hopf_scaling_study(cfg: Config, threads: int):
    system = cfg.get("system", "normalform")
    eps_ladder = cfg.get_floats("sweep.eps", [1e-3, 3e-4, 1e-4, 3e-5])
    check_eps_values(cfg, eps_ladder)
    reg = make_reg(cfg)
    k = reg.k
    pref_expected = None
    if system == "gause":
        p = make_gause(cfg)
        ref = applications.gause_mu_bf(p)
        tasks = [lambda e=eps: applications.gause_hopf(p, reg, e) for eps in eps_ladder]
        values = run_parallel(tasks, threads)
        diffs = [abs(v - ref) for v in values]
    elif system == "stickslip":
        p = make_stickslip(cfg)
        ref = 0.0
        tasks = [lambda e=eps: applications.stickslip_alpha_ah(p, reg, e)[1] for eps in eps_ladder]
        values = run_parallel(tasks, threads)
        diffs = [abs(v) for v in values]
        slope0 = applications.stickslip_mu_plus_prime(p, 0.0)
        pref_expected = (2.0 * reg.beta * p.mu_s * k / (-slope0)) ** (1.0 / (1 + k))
    else:
        p = make_normal_form(cfg)
        ref = 0.0
        tasks = [lambda e=eps: bifurcation.hopf_full_numeric(p, reg, e) for eps in eps_ladder]
        values = run_parallel(tasks, threads)
        diffs = [abs(v) for v in values]
        if p.gamma < p.delta / p.tau:
            pref_expected = abs(bifurcation.hopf_curve_hat(p.gamma, k, reg.beta, p.tau, p.delta))
    logs_e = np.log(eps_ladder)
    logs_d = np.log(diffs)
    slope, intercept = np.polyfit(logs_e, logs_d, 1)
    resid = logs_d - (slope * logs_e + intercept)
    prefactor_fit = float(math.exp(intercept))
    prefactor_smallest = diffs[int(np.argmin(eps_ladder))] / min(eps_ladder) ** (k / (k + 1.0))
    return {
        "system": system, "k": k, "eps": list(eps_ladder), "onset": list(values),
        "offsets": diffs, "reference": ref, "slope": float(slope),
        "slope_expected": k / (k + 1.0),
        "prefactor_fit": prefactor_fit, "prefactor_smallest_eps": float(prefactor_smallest),
        "prefactor_expected": pref_expected,
        "fit_residual_rms": float(np.sqrt(np.mean(resid**2))),
    }


def cmd_hopf_scaling(cfg: Config, out: Path, args) -> int:
    study = _hopf_scaling_study(cfg, args.threads)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "hopf_scaling.csv",
              ["eps [1]", "onset_parameter [1]", "offset_from_reference [1]"],
              list(zip(study["eps"], study["onset"], study["offsets"])))
    write_svg_lines(out / "hopf_scaling.svg",
                    [("measured", study["eps"], study["offsets"], "o-")],
                    cfg, xlabel="eps", ylabel="onset offset", logx=True, logy=True,
                    title=f"onset scaling, slope {study['slope']:.4f} (expect {study['slope_expected']:.4f})")
    write_sidecar(out / "hopf_scaling.meta.json", cfg, study)
    print(json.dumps({k: v for k, v in study.items() if k != "onset"}, indent=2))
    return EXIT_OK


def cmd_relax_converge(cfg: Config, out: Path, args) -> int:
    p = make_normal_form(cfg)
    reg = make_reg(cfg)
    mu = cfg.get_float("sweep.mu", 0.3)
    eps_ladder = cfg.get_floats("sweep.eps", [1e-3, 3e-4, 1e-4, 3e-5])
    check_eps_values(cfg, eps_ladder)
    study = dynamics.relax_convergence_study(p, reg, mu, eps_ladder)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "relax_converge.csv",
              ["eps [1]", "hausdorff_distance [1]"],
              list(zip(study.eps, study.distances)))
    write_svg_lines(out / "relax_converge.svg",
                    [("distance", study.eps, study.distances, "o-")],
                    cfg, xlabel="eps", ylabel="Hausdorff distance", logx=True, logy=True,
                    title=f"cycle convergence, slope {study.slope:.4f} "
                          f"(expect {2*reg.k/(2*reg.k+1):.4f})")
    logs_e = np.log(study.eps)
    logs_d = np.log(study.distances)
    resid = logs_d - np.polyval(np.polyfit(logs_e, logs_d, 1), logs_e)
    ss_tot = float(np.sum((logs_d - logs_d.mean()) ** 2)) if len(study.distances) > 2 else float("nan")
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot else float("nan")
    write_sidecar(out / "relax_converge.meta.json", cfg, {
        "slope": study.slope, "expected": 2 * reg.k / (2 * reg.k + 1),
        "distances": study.distances, "eps": study.eps,
        "monotone": study.monotone, "failures": study.failures, "fit_r2": r2,
    })
    print(f"slope = {study.slope:.4f} (expected {2*reg.k/(2*reg.k+1):.4f}), "
          f"monotone = {study.monotone}, R^2 = {r2:.5f}")
    return EXIT_OK if not study.failures else EXIT_NUMERICAL


def cmd_cycle_branch(cfg: Config, out: Path, args) -> int:
    p = make_normal_form(cfg)
    reg = make_reg(cfg)
    eps = cfg.get_float("sweep.eps_single", 1e-3)
    check_eps_values(cfg, [eps])
    mu_lo = cfg.get_float("sweep.mu_min", 0.05)
    mu_hi = cfg.get_float("sweep.mu_max", 0.3)
    steps = cfg.get_int("sweep.mu_steps", 25)
    branch = dynamics.continue_cycle_in_mu(p, reg, eps, (mu_lo, mu_hi), steps=steps)
    rows = [(mu, c.amplitude, c.period, c.floquet) for mu, c in branch.samples]
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "cycle_branch.csv",
              ["mu [1]", "amplitude [1]", "period [time]", "floquet [1]"], rows)
    hopf_scale = eps ** (reg.k / (reg.k + 1.0))
    curves = [("amplitude", [r[0] for r in rows], [r[1] for r in rows], "o-"),
              ("onset scale", [hopf_scale, hopf_scale], [0, max((r[1] for r in rows), default=1.0)], "--")]
    write_svg_lines(out / "cycle_branch.svg", curves, cfg,
                    xlabel="mu", ylabel="amplitude",
                    title=f"stable cycle family, eps={eps:g} (terminated by {branch.terminated_by})")
    write_sidecar(out / "cycle_branch.meta.json", cfg, {
        "terminated_by": branch.terminated_by, "samples": len(rows), "eps": eps,
    })
    print(f"{len(rows)} cycles, terminated by: {branch.terminated_by}")
    return EXIT_OK


def cmd_gause(cfg: Config, out: Path, args) -> int:
    p = make_gause(cfg)
    reg = make_reg(cfg)
    eps = cfg.get_float("sweep.eps_single", 1e-2)
    check_eps_values(cfg, [eps])
    mu_bf = applications.gause_mu_bf(p)
    cyc = applications.gause_relaxation_cycle(p, reg, eps)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "mu_bf": mu_bf, "h_star": applications.gause_h_star(p), "mu": p.mu, "eps": eps,
        "cycle": None if cyc is None else {
            "period": cyc.period, "floquet": cyc.floquet,
            "amplitude": cyc.amplitude, "min_y": float(cyc.points[:, 1].min()),
        },
    }
    if cyc is not None:
        write_csv(out / "gause_cycle.csv", ["x [predators]", "y [prey shift]"],
                  [tuple(pt) for pt in cyc.points])
        write_svg_lines(out / "gause_cycle.svg",
                        [("cycle", cyc.points[:, 0], cyc.points[:, 1], "-")],
                        cfg, xlabel="predator density", ylabel="prey offset from threshold",
                        title=f"relaxation cycle, mu={p.mu:g}, eps={eps:g}")
    write_sidecar(out / "gause.meta.json", cfg, payload)
    print(json.dumps(payload, indent=2))
    return EXIT_OK if cyc is not None else EXIT_NUMERICAL


def cmd_stickslip(cfg: Config, out: Path, args) -> int:
    p = make_stickslip(cfg)
    reg = make_reg(cfg)
    eps = cfg.get_float("sweep.eps_single", 1e-2)
    check_eps_values(cfg, [eps])
    cyc = applications.stickslip_relaxation_cycle(p, reg, eps)
    ana, num = applications.stickslip_alpha_ah(p, reg, eps)
    payload = {
        "alpha": p.alpha, "eps": eps,
        "onset_analytic": ana, "onset_numeric": num,
        "friction_slope_at_rest": applications.stickslip_mu_plus_prime(p, 0.0),
        "cycle": None if cyc is None else {
            "period": cyc.period, "floquet": cyc.floquet, "amplitude": cyc.amplitude,
        },
    }
    out.mkdir(parents=True, exist_ok=True)
    if cyc is not None:
        write_csv(out / "stickslip_cycle.csv", ["x [displacement]", "y [velocity]"],
                  [tuple(pt) for pt in cyc.points])
        write_svg_lines(out / "stickslip_cycle.svg",
                        [("cycle", cyc.points[:, 0], cyc.points[:, 1], "-")],
                        cfg, xlabel="displacement", ylabel="velocity",
                        title=f"stick-slip cycle, alpha={p.alpha:g}, eps={eps:g}")
    write_sidecar(out / "stickslip.meta.json", cfg, payload)
    print(json.dumps(payload, indent=2))
    return EXIT_OK if cyc is not None else EXIT_NUMERICAL


def cmd_creep(cfg: Config, out: Path, args) -> int:
    p = make_stickslip(cfg)
    reg = make_reg(cfg)
    eps = cfg.get_float("sweep.eps_single", 1e-2)
    check_eps_values(cfg, [eps])
    a = cfg.get_float("sweep.creep_a", 0.5)
    rep = applications.creep_study(p, reg, eps, a)
    payload = {
        "eps": rep.eps, "a": rep.a, "alpha": rep.alpha,
        "equilibrium": list(rep.equilibrium),
        "residual_max": rep.residual_max, "residual_bound": rep.residual_bound,
        "halving_time": rep.halving_time, "window": rep.window,
    }
    out.mkdir(parents=True, exist_ok=True)
    write_sidecar(out / "creep.meta.json", cfg, payload)
    print(json.dumps(payload, indent=2))
    return EXIT_OK if rep.residual_max <= rep.residual_bound else EXIT_CHECK_FAILED


def cmd_verify(cfg: Config, out: Path, args) -> int:
    from . import acceptance

    results = acceptance.run_all(fast=args.fast, threads=args.threads)
    out.mkdir(parents=True, exist_ok=True)
    payload = [r.as_dict() for r in results]
    (out / "verify.json").write_text(json.dumps(payload, indent=2, default=str) + "\n")
    failed = [r for r in results if not r.passed and not r.skipped]
    for r in results:
        print(r.line())
    print(f"{sum(1 for r in results if r.passed)} passed, {len(failed)} failed, "
          f"{sum(1 for r in results if r.skipped)} skipped")
    return EXIT_OK if not failed else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

_COMMANDS = {
    "validate-reg": cmd_validate_reg,
    "pws-report": cmd_pws_report,
    "desing-diagram": cmd_desing_diagram,
    "hopf-scaling": cmd_hopf_scaling,
    "relax-converge": cmd_relax_converge,
    "cycle-branch": cmd_cycle_branch,
    "gause": cmd_gause,
    "stickslip": cmd_stickslip,
    "creep": cmd_creep,
    "verify": cmd_verify,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="pwsbif",
        description="Analysis of regularized planar two-zone systems: collision "
                    "unfoldings, scaling laws, and relaxation oscillations.",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", default=None, help="flat key=value config file")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--threads", type=int, default=1, help="parallel sweep workers")
    parser.add_argument("--fast", action="store_true",
                        help="verify: skip the eps-ladder criteria, algebra-only")
    parser.add_argument("--seedless", action="store_true",
                        help="assert that the run plan involves no random numbers")
    args = parser.parse_args(argv)

    try:
        cfg = Config(load_config(args.config))
        if args.seedless:
            # every computation in this package is deterministic; the flag
            # exists so scripted callers can assert that contract
            cfg.data["run.seedless"] = "true"
        return _COMMANDS[args.command](cfg, Path(args.out), args)
    except ExpressionParseError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DetectionError, BudgetError, StiffnessError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except PwsbifError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
