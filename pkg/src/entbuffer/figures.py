"""Experiment runners behind the command line: named figures, CSV, manifests.

Every run writes one CSV (atomically: temp file then rename) and appends a
JSON line to manifests.jsonl in the output directory recording the figure id,
the full parameter set including the seed, the tool version, and wall time.
All angles appearing in parameters or files are in units of pi.
"""
from __future__ import annotations

import json
import os
import tempfile
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import __version__
from .channel import all_zero_buffer, iterate, maximally_mixed_buffer
from .gates import BufferSystem, SwapParams
from .loss import (LossConfig, estimate_q, estimate_q_vs_n,
                   exact_branch_distribution, loss_sweep, q_n_full_iswap,
                   q_n_full_swap)
from .single_copy import (PureInit, multi_pass_single_pair, pure_buffer_state,
                          pure_sweep, single_copy_E)
from .steady import one_ebit_contour, steady_state_grid


class Experiment(Enum):
    SINGLE_COPY = "single-copy"
    PURE_SWEEP = "pure-sweep"
    MULTI_PASS = "multi-pass"
    STEADY_GRID = "steady-grid"
    MULTI_COPY_TRACE = "multi-copy-trace"
    LOSS_SWEEP = "loss-sweep"
    ORACLES = "oracles"


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: Experiment
    parameters: dict
    output_path: str

    def validated(self) -> "ExperimentConfig":
        allowed = _ALLOWED_KEYS[self.experiment]
        required = _REQUIRED_KEYS[self.experiment]
        unknown = set(self.parameters) - allowed
        if unknown:
            raise ValueError(
                f"unknown parameter(s) for {self.experiment.value}: "
                f"{sorted(unknown)}; allowed: {sorted(allowed)}"
            )
        missing = required - set(self.parameters)
        if missing:
            raise ValueError(
                f"missing parameter(s) for {self.experiment.value}: {sorted(missing)}"
            )
        return self


@dataclass(frozen=True)
class RunManifest:
    figure_id: str
    config: ExperimentConfig
    tool_version: str
    wall_time: float

    def as_json(self) -> str:
        return json.dumps(
            {
                "figure_id": self.figure_id,
                "experiment": self.config.experiment.value,
                "parameters": self.config.parameters,
                "output_path": self.config.output_path,
                "tool_version": self.tool_version,
                "wall_time_s": round(self.wall_time, 3),
            },
            sort_keys=True,
        )


_COMMON_KEYS = {"figure_id"}
_ALLOWED_KEYS = {
    Experiment.SINGLE_COPY: _COMMON_KEYS | {
        "k", "alpha", "beta", "family", "init", "theta", "delta", "alpha_grid"},
    Experiment.PURE_SWEEP: _COMMON_KEYS | {
        "k", "family", "alpha", "beta", "alpha_grid", "alpha_points",
        "theta_points", "delta_points", "delta", "panels"},
    Experiment.MULTI_PASS: _COMMON_KEYS | {
        "k_values", "alpha", "family", "max_passes", "threshold"},
    Experiment.STEADY_GRID: _COMMON_KEYS | {
        "k", "alpha_min", "alpha_max", "alpha_points", "beta_points",
        "contour", "beta_fraction", "alpha"},
    Experiment.MULTI_COPY_TRACE: _COMMON_KEYS | {
        "k", "family", "alphas", "steps"},
    Experiment.LOSS_SWEEP: _COMMON_KEYS | {
        "k", "p", "n", "samples", "seed", "thresholds", "alpha_min",
        "alpha_max", "alpha_points", "families", "sweep", "step_values",
        "alpha"},
    Experiment.ORACLES: _COMMON_KEYS | {"p", "n", "seed", "samples"},
}
_REQUIRED_KEYS = {
    Experiment.SINGLE_COPY: {"k"},
    Experiment.PURE_SWEEP: {"k"},
    Experiment.MULTI_PASS: {"k_values", "alpha"},
    Experiment.STEADY_GRID: {"k"},
    Experiment.MULTI_COPY_TRACE: {"k", "alphas", "steps"},
    Experiment.LOSS_SWEEP: {"k", "p", "n", "samples", "seed"},
    Experiment.ORACLES: {"p", "n"},
}


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.6g}"
    return str(x)


def write_csv(path: str, header: list[str], rows) -> None:
    """Write rows atomically; reals get 6 significant digits."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(x) for x in row) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def append_manifest(manifest: RunManifest) -> str:
    directory = os.path.dirname(os.path.abspath(manifest.config.output_path)) or "."
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, "manifests.jsonl")
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(manifest.as_json() + "\n")
    return path


def _params_of(family: str, alpha: float) -> SwapParams:
    alpha_rad = alpha * np.pi
    if family == "swap":
        return SwapParams.swap(alpha_rad)
    if family == "iswap":
        return SwapParams.iswap(alpha_rad)
    raise ValueError(f"family must be swap or iswap, got {family!r}")


# ---------------------------------------------------------------- runners

def _run_pure_sweep(p: dict):
    k = int(p["k"])
    sys = BufferSystem(k)
    theta_pts = int(p.get("theta_points", 61))
    delta_pts = int(p.get("delta_points", 1))
    thetas = np.linspace(0.0, np.pi, theta_pts, endpoint=False)
    deltas = (np.linspace(0.0, 2 * np.pi, delta_pts, endpoint=False)
              if delta_pts > 1 else np.array([float(p.get("delta", 0.0)) * np.pi]))
    rows = []
    if "panels" in p:
        header = ["panel", "alpha", "beta", "theta", "delta", "E"]
        for label, al, be in p["panels"]:
            params = SwapParams(al * np.pi, be * np.pi)
            for pt in pure_sweep(sys, params, thetas, deltas):
                rows.append([label, al, be, pt.theta / np.pi, pt.delta / np.pi,
                             pt.negativity])
        return header, rows
    header = ["alpha", "theta", "delta", "E"]
    family = p.get("family", "swap")
    alphas = p.get("alpha_grid")
    if alphas is None:
        alphas = np.linspace(0.0, 1.0, int(p.get("alpha_points", 41)))
    for al in alphas:
        params = _params_of(family, float(al))
        for pt in pure_sweep(sys, params, thetas, deltas):
            rows.append([float(al), pt.theta / np.pi, pt.delta / np.pi,
                         pt.negativity])
    return header, rows


def _run_single_copy(p: dict):
    family = p.get("family")
    alphas = p.get("alpha_grid")
    if alphas is None and "alpha" not in p:
        raise ValueError("single-copy needs either alpha or alpha_grid")
    ks = p["k"] if isinstance(p["k"], (list, tuple)) else [p["k"]]
    header = ["k", "alpha", "beta", "E"]
    rows = []
    for k in ks:
        sys = BufferSystem(int(k))
        init_name = p.get("init", "zero")
        if init_name == "zero":
            init = all_zero_buffer(sys)
        elif init_name == "mixed":
            init = maximally_mixed_buffer(sys)
        elif init_name == "pure":
            init = pure_buffer_state(
                sys, PureInit(float(p.get("theta", 0.0)) * np.pi,
                              float(p.get("delta", 0.0)) * np.pi))
        else:
            raise ValueError(f"unknown init {init_name!r}")
        a_list = alphas if alphas is not None else [p["alpha"]]
        for al in a_list:
            if family is not None:
                params = _params_of(family, float(al))
            else:
                params = SwapParams(float(al) * np.pi,
                                    float(p.get("beta", 0.0)) * np.pi)
            rows.append([int(k), float(al), params.beta / np.pi,
                         single_copy_E(sys, params, init)])
    return header, rows


def _run_multi_pass(p: dict):
    alpha = float(p["alpha"]) * np.pi
    family = p.get("family", "iswap")
    threshold = float(p.get("threshold", 1.0 - 1e-6))
    header = ["k", "alpha", "n_star", "time_scaled", "sqrt_k", "criterion"]
    rows = []
    for k in p["k_values"]:
        k = int(k)
        sys = BufferSystem(k)
        params = (SwapParams.iswap(alpha) if family == "iswap"
                  else SwapParams.swap(alpha))
        default_passes = int(np.ceil(1.8 * np.pi / (np.sqrt(k) * alpha)))
        n_passes = int(p.get("max_passes", default_passes))
        res = multi_pass_single_pair(sys, params, n_passes, threshold)
        rows.append([k, float(p["alpha"]),
                     res.n_star if res.n_star is not None else -1,
                     res.scaled_time if res.scaled_time is not None else -1.0,
                     float(np.sqrt(k)), res.criterion])
    return header, rows


def _run_steady_grid(p: dict):
    k = int(p["k"])
    sys = BufferSystem(k)
    a_min = float(p.get("alpha_min", 0.05))
    a_max = float(p.get("alpha_max", 1.0))
    a_pts = int(p.get("alpha_points", 24))
    b_pts = int(p.get("beta_points", 24))
    alphas = np.linspace(a_min, a_max, a_pts) * np.pi
    fracs = np.linspace(0.0, 1.0, b_pts)
    points = steady_state_grid(sys, alphas, fracs)
    header = ["alpha", "beta", "E_infinity", "residual", "kernel_dim"]
    rows = [[pt.alpha_over_pi, pt.beta_over_pi, pt.negativity, pt.residual,
             pt.kernel_dim] for pt in points]
    contour_rows = None
    if p.get("contour", False):
        polylines = one_ebit_contour(points, level=1.0)
        contour_rows = []
        for seg, line in enumerate(polylines):
            for al, be in line:
                contour_rows.append([seg, al, be])
    return header, rows, contour_rows


def _run_multi_copy_trace(p: dict):
    k = int(p["k"])
    sys = BufferSystem(k)
    family = p.get("family", "iswap")
    steps = int(p["steps"])
    header = ["alpha", "n", "E"]
    rows = []
    for al in p["alphas"]:
        params = _params_of(family, float(al))
        trace = iterate(all_zero_buffer(sys), sys, params, steps)
        for n, e in enumerate(trace.negativities):
            rows.append([float(al), n, e])
    return header, rows


def _run_loss_sweep(p: dict):
    k_param = p["k"]
    k = int(k_param[0]) if isinstance(k_param, (list, tuple)) else int(k_param)
    sys = BufferSystem(k)
    cfg = LossConfig(float(p["p"]), int(p["n"]), int(p["samples"]),
                     1.0, int(p["seed"]))
    header = ["k", "alpha_over_pi", "family", "E_threshold", "q_hat", "stderr",
              "n", "M", "p", "seed"]
    families = tuple(p.get("families", ("swap", "iswap")))
    if p.get("sweep", "alpha") == "steps":
        rows = []
        steps = [int(s) for s in p["step_values"]]
        cfg_full = LossConfig(cfg.p, max(steps), cfg.M, 1.0, cfg.seed)
        ks = p["k"] if isinstance(p["k"], (list, tuple)) else [p["k"]]
        for kk in ks:
            sys_k = BufferSystem(int(kk))
            for family in families:
                params = _params_of(family, float(p.get("alpha", 1.0)))
                for est in estimate_q_vs_n(sys_k, params, cfg_full, steps):
                    rows.append([int(kk), float(p.get("alpha", 1.0)), family,
                                 1.0, est.q_hat, est.stderr, est.config.n,
                                 est.config.M, cfg.p, cfg.seed])
        return header, rows
    thresholds = tuple(float(t) for t in p.get("thresholds", (1.0,)))
    a_min = float(p.get("alpha_min", 0.3))
    a_max = float(p.get("alpha_max", 1.0))
    a_pts = int(p.get("alpha_points", 13))
    alphas = np.linspace(a_min, a_max, a_pts) * np.pi
    rows = [
        [r.k, r.alpha_over_pi, r.family, r.E_threshold, r.q_hat, r.stderr,
         r.n, r.M, r.p, r.seed]
        for r in loss_sweep(sys, cfg, alphas, families, thresholds)
    ]
    return header, rows


def _run_oracles(p: dict):
    pp = float(p["p"])
    n = int(p["n"])
    seed = int(p.get("seed", 2024))
    samples = int(p.get("samples", 5000))
    sys = BufferSystem(1)
    header = ["check", "lhs", "rhs", "abs_diff", "tolerance", "status"]
    rows = []

    def add(name, lhs, rhs, tol):
        diff = abs(lhs - rhs)
        rows.append([name, lhs, rhs, diff, tol,
                     "pass" if diff <= tol else "FAIL"])

    n_exact = min(n, 8)
    ex = exact_branch_distribution(sys, SwapParams.swap(np.pi), pp, n_exact, 1.0)
    add("exact_vs_closed_form_swap", ex.q, q_n_full_swap(pp, n_exact), 1e-12)
    add("branch_weights_sum", ex.total_weight, 1.0, 1e-12)
    exi = exact_branch_distribution(sys, SwapParams.iswap(np.pi), pp, n_exact,
                                    1.0, init=maximally_mixed_buffer(sys))
    add("exact_vs_closed_form_iswap", exi.q, q_n_full_iswap(pp, n_exact), 1e-12)
    cfg = LossConfig(pp, n, samples, 1.0, seed)
    est = estimate_q(sys, SwapParams.swap(np.pi), cfg)
    add("mc_vs_closed_form_swap", est.q_hat, q_n_full_swap(pp, n),
        4 * max(est.stderr, 1e-12))
    esti = estimate_q(sys, SwapParams.iswap(np.pi), cfg)
    add("mc_vs_closed_form_iswap", esti.q_hat, q_n_full_iswap(pp, n),
        4 * max(esti.stderr, 1e-12))
    return header, rows


def run(config: ExperimentConfig, figure_id: str = "") -> RunManifest:
    """Validate, dispatch, write CSV and manifest, return the manifest."""
    config = config.validated()
    started = time.time()
    p = config.parameters
    contour_rows = None
    if config.experiment is Experiment.PURE_SWEEP:
        header, rows = _run_pure_sweep(p)
    elif config.experiment is Experiment.SINGLE_COPY:
        header, rows = _run_single_copy(p)
    elif config.experiment is Experiment.MULTI_PASS:
        header, rows = _run_multi_pass(p)
    elif config.experiment is Experiment.STEADY_GRID:
        header, rows, contour_rows = _run_steady_grid(p)
    elif config.experiment is Experiment.MULTI_COPY_TRACE:
        header, rows = _run_multi_copy_trace(p)
    elif config.experiment is Experiment.LOSS_SWEEP:
        header, rows = _run_loss_sweep(p)
    elif config.experiment is Experiment.ORACLES:
        header, rows = _run_oracles(p)
    else:
        raise ValueError(f"unhandled experiment {config.experiment}")
    write_csv(config.output_path, header, rows)
    if contour_rows is not None:
        base, ext = os.path.splitext(config.output_path)
        write_csv(base + "_contour" + ext, ["segment", "alpha", "beta"],
                  contour_rows)
    manifest = RunManifest(figure_id, config, __version__,
                           time.time() - started)
    append_manifest(manifest)
    return manifest


# ---------------------------------------------------------------- catalog

@dataclass(frozen=True)
class FigureSpec:
    figure_id: str
    experiment: Experiment
    module: str
    description: str
    runtime: str
    defaults: dict = field(default_factory=dict)

    def config(self, out_dir: str = "out", overrides: dict | None = None
               ) -> ExperimentConfig:
        params = dict(self.defaults)
        if overrides:
            params.update(overrides)
        path = os.path.join(out_dir, f"{self.figure_id}.csv")
        return ExperimentConfig(self.experiment, params, path)


_APPENDIX7_PANELS = [
    ["a", 0.25, 0.25], ["b", 0.5, 0.5], ["c", 0.75, 0.75], ["d", 1.0, 1.0],
    ["e", 0.75, 0.0], ["f", 0.75, 0.25], ["g", 0.75, 0.5], ["h", 0.75, 0.75],
]

CATALOG: dict[str, FigureSpec] = {}


def _add(spec: FigureSpec):
    CATALOG[spec.figure_id] = spec


_add(FigureSpec(
    "fig2a", Experiment.PURE_SWEEP, "single_copy",
    "single-copy E vs (theta, alpha), SWAP family, 1-pair buffer, delta=0",
    "~5 s",
    {"k": 1, "family": "swap", "alpha_points": 41, "theta_points": 61,
     "delta": 0.0}))
_add(FigureSpec(
    "fig2b", Experiment.PURE_SWEEP, "single_copy",
    "single-copy E vs (theta, alpha), iSWAP family, 1-pair buffer, delta=0",
    "~5 s",
    {"k": 1, "family": "iswap", "alpha_points": 41, "theta_points": 61,
     "delta": 0.0}))
_add(FigureSpec(
    "fig3a", Experiment.SINGLE_COPY, "single_copy",
    "single caching unitary from all-|0>: E vs alpha for k = 1..4 (SWAP)",
    "~30 s",
    {"k": [1, 2, 3, 4], "family": "swap",
     "alpha_grid": [round(float(x), 4) for x in np.linspace(0.0, 1.0, 41)],
     "init": "zero"}))
_add(FigureSpec(
    "fig3b", Experiment.MULTI_PASS, "single_copy",
    "repeated weak caching: scaled 1-ebit time n*k*alpha/pi vs sqrt(k)",
    "~30 s",
    {"k_values": [1, 2, 3, 4], "alpha": 0.02, "family": "iswap"}))
_add(FigureSpec(
    "fig4a", Experiment.STEADY_GRID, "steady_state",
    "steady-state E over (alpha, beta), 1-pair buffer",
    "~3 min (the small-alpha iSWAP corner converges slowly)",
    {"k": 1, "alpha_min": 0.05, "alpha_points": 32, "beta_points": 32}))
_add(FigureSpec(
    "fig4b", Experiment.MULTI_COPY_TRACE, "caching_channel",
    "buffer filling E(n) under partial iSWAP steps from |00>",
    "~2 s",
    {"k": 1, "family": "iswap", "alphas": [0.1, 0.2, 0.3, 0.5, 1.0],
     "steps": 30}))
_add(FigureSpec(
    "fig5a", Experiment.STEADY_GRID, "steady_state",
    "steady-state E over (alpha, beta), 2-pair buffer, with 1-ebit contour",
    "~3 min",
    {"k": 2, "alpha_min": 0.1, "alpha_points": 21, "beta_points": 21,
     "contour": True}))
_add(FigureSpec(
    "fig5b", Experiment.STEADY_GRID, "steady_state",
    "steady-state E over (alpha, beta), 3-pair buffer, with 1-ebit contour",
    "~10 min",
    {"k": 3, "alpha_min": 0.15, "alpha_points": 15, "beta_points": 15,
     "contour": True}))
_add(FigureSpec(
    "fig6a", Experiment.LOSS_SWEEP, "loss_engine",
    "loss MC q_10(E) vs alpha, 1-pair buffer, p = 0.5",
    "~1 min",
    {"k": 1, "p": 0.5, "n": 10, "samples": 5000, "seed": 2024,
     "thresholds": [0.9, 0.99], "alpha_min": 0.3, "alpha_points": 13}))
_add(FigureSpec(
    "fig6b", Experiment.LOSS_SWEEP, "loss_engine",
    "loss MC q_10(E) vs alpha, 2-pair buffer, p = 0.5",
    "~5 min",
    {"k": 2, "p": 0.5, "n": 10, "samples": 5000, "seed": 2024,
     "thresholds": [0.9, 0.99], "alpha_min": 0.3, "alpha_points": 13}))
_add(FigureSpec(
    "appendix-fig7", Experiment.PURE_SWEEP, "single_copy",
    "single-copy E vs (theta, delta) for eight (alpha, beta) panels",
    "~1 min",
    {"k": 1, "theta_points": 31, "delta_points": 31,
     "panels": _APPENDIX7_PANELS}))
_add(FigureSpec(
    "appendix-fig8", Experiment.PURE_SWEEP, "single_copy",
    "single-copy E vs (theta, alpha) for a 2-pair buffer, both families",
    "~2 min",
    {"k": 2, "family": "iswap", "alpha_points": 25, "theta_points": 41,
     "delta": 0.0}))
_add(FigureSpec(
    "appendix-fig10c", Experiment.LOSS_SWEEP, "loss_engine",
    "loss MC q_10(E) vs alpha, 4-pair buffer, p = 0.5 (dense channel: slow)",
    "~1 h at default samples; scale --samples as needed",
    {"k": 4, "p": 0.5, "n": 10, "samples": 400, "seed": 2024,
     "thresholds": [0.9, 0.99], "alpha_min": 0.5, "alpha_points": 7}))
_add(FigureSpec(
    "appendix-fig10d", Experiment.LOSS_SWEEP, "loss_engine",
    "convergence of the full-gate success rate with step count, k = 1, 2, 4",
    "~2 min",
    {"k": [1, 2, 4], "p": 0.5, "n": 14, "samples": 5000, "seed": 2024,
     "sweep": "steps", "alpha": 1.0,
     "step_values": [1, 2, 3, 4, 5, 6, 8, 10, 12, 14]}))
_add(FigureSpec(
    "appendix-fig11a", Experiment.LOSS_SWEEP, "loss_engine",
    "loss MC q_66(E) vs alpha at p = 0.1, 1-pair buffer",
    "~2 min",
    {"k": 1, "p": 0.1, "n": 66, "samples": 5000, "seed": 2024,
     "thresholds": [0.9, 0.99], "alpha_min": 0.3, "alpha_points": 13}))
_add(FigureSpec(
    "appendix-fig11b", Experiment.LOSS_SWEEP, "loss_engine",
    "loss MC q_66(E) vs alpha at p = 0.1, 2-pair buffer",
    "~10 min",
    {"k": 2, "p": 0.1, "n": 66, "samples": 5000, "seed": 2024,
     "thresholds": [0.9, 0.99], "alpha_min": 0.3, "alpha_points": 13}))
_add(FigureSpec(
    "appendix-fig11c", Experiment.LOSS_SWEEP, "loss_engine",
    "loss MC q_66(E) vs alpha at p = 0.1, 4-pair buffer (dense channel: slow)",
    "~1 h at default samples; scale --samples as needed",
    {"k": 4, "p": 0.1, "n": 66, "samples": 300, "seed": 2024,
     "thresholds": [0.9, 0.99], "alpha_min": 0.5, "alpha_points": 7}))
_add(FigureSpec(
    "oracle-check", Experiment.ORACLES, "loss_engine",
    "exact branch enumeration vs closed forms vs Monte Carlo consistency",
    "~10 s",
    {"p": 0.5, "n": 10, "seed": 2024, "samples": 5000}))


def run_figure(figure_id: str, out_dir: str = "out",
               overrides: dict | None = None) -> RunManifest:
    if figure_id not in CATALOG:
        raise KeyError(
            f"unknown figure id {figure_id!r}; see the catalog for valid ids"
        )
    spec = CATALOG[figure_id]
    return run(spec.config(out_dir, overrides), figure_id)


def catalog_rows() -> list[dict]:
    return [
        {
            "figure_id": spec.figure_id,
            "experiment": spec.experiment.value,
            "module": spec.module,
            "description": spec.description,
            "runtime": spec.runtime,
            "defaults": spec.defaults,
        }
        for spec in CATALOG.values()
    ]
