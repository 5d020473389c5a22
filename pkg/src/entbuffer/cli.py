"""Command line front end.

Usage: entbuffer <subcommand> [--flag value] ...

Subcommands: figure, single-copy, steady-state, loss-mc, oracle-check, list.
All angle flags (--alpha, --beta, --theta, --delta) are in units of pi.
"""
from __future__ import annotations

import argparse
import json
import sys as _sys

import numpy as np

from . import __version__
from .channel import all_zero_buffer, maximally_mixed_buffer
from .figures import (Experiment, ExperimentConfig, catalog_rows, run,
                      run_figure)
from .gates import BufferSystem, SwapParams
from .loss import LossConfig, estimate_q
from .single_copy import PureInit, pure_buffer_state, single_copy_E
from .steady import steady_state, steady_state_nullspace


def _parse_scalar(text: str):
    """Config values: true/false, int, float, quoted or bare string."""
    t = text.strip()
    if t.lower() in ("true", "false"):
        return t.lower() == "true"
    if len(t) >= 2 and t[0] == t[-1] and t[0] in "'\"":
        return t[1:-1]
    if t.startswith("[") and t.endswith("]"):
        inner = t[1:-1].strip()
        return [] if not inner else [_parse_scalar(x) for x in inner.split(",")]
    try:
        return int(t)
    except ValueError:
        pass
    try:
        return float(t)
    except ValueError:
        pass
    return t


def load_config_file(path: str) -> dict:
    """Flat `key = value` lines; '#' starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = line.split("=", 1)
            out[key.strip()] = _parse_scalar(value)
    return out


def _fail(message: str) -> int:
    print(json.dumps({"error": message}), file=_sys.stderr)
    return 2


def _cmd_figure(args) -> int:
    overrides = {}
    if args.config:
        overrides.update(load_config_file(args.config))
    figure_id = args.figure_id or overrides.pop("figure_id", None)
    if not figure_id:
        return _fail("figure id required (positional or in the config file)")
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.samples is not None:
        overrides["samples"] = args.samples
    try:
        manifest = run_figure(figure_id, args.out, overrides or None)
    except (KeyError, ValueError) as exc:
        return _fail(str(exc))
    print(f"{figure_id}: wrote {manifest.config.output_path} "
          f"({manifest.wall_time:.2f} s)")
    return 0


def _cmd_list(args) -> int:
    rows = catalog_rows()
    if args.json:
        print(json.dumps(rows, indent=2))
        return 0
    width = max(len(r["figure_id"]) for r in rows)
    for r in rows:
        print(f"{r['figure_id']:<{width}}  [{r['module']}, {r['runtime']}]  "
              f"{r['description']}")
        defaults = ", ".join(f"{k}={v}" for k, v in r["defaults"].items())
        print(f"{'':<{width}}  defaults: {defaults}")
    return 0


def _swap_params(args) -> SwapParams:
    alpha = args.alpha * np.pi
    beta = (args.beta if args.beta is not None else 0.0) * np.pi
    return SwapParams(alpha, beta)


def _cmd_single_copy(args) -> int:
    sys = BufferSystem(args.k)
    params = _swap_params(args)
    if args.init == "mixed":
        init = maximally_mixed_buffer(sys)
    elif args.init == "pure":
        init = pure_buffer_state(sys, PureInit(args.theta * np.pi,
                                               args.delta * np.pi))
    else:
        init = all_zero_buffer(sys)
    e = single_copy_E(sys, params, init)
    print(f"E = {e:.6g} ebit (k={args.k}, alpha={args.alpha}pi, "
          f"beta={(args.beta or 0.0)}pi, init={args.init})")
    if args.out:
        cfg = ExperimentConfig(
            Experiment.SINGLE_COPY,
            {"k": args.k, "alpha": args.alpha, "beta": args.beta or 0.0,
             "init": args.init, "theta": args.theta, "delta": args.delta},
            args.out)
        run(cfg, figure_id="single-copy-cli")
    return 0


def _cmd_steady_state(args) -> int:
    sys = BufferSystem(args.k)
    params = _swap_params(args)
    try:
        if args.method == "nullspace":
            res = steady_state_nullspace(sys, params)
        else:
            res = steady_state(sys, params, all_zero_buffer(sys))
    except Exception as exc:  # degenerate or non-convergent
        return _fail(str(exc))
    print(f"E_infinity = {res.negativity:.6g} ebit  residual = {res.residual:.3g}"
          f"  kernel_dim = {res.kernel_dimension}  method = {res.method.value}")
    if args.out:
        from .figures import write_csv

        write_csv(args.out,
                  ["alpha", "beta", "E_infinity", "residual", "kernel_dim"],
                  [[args.alpha, args.beta or 0.0, res.negativity, res.residual,
                    res.kernel_dimension]])
        print(f"wrote {args.out}")
    return 0


def _cmd_loss_mc(args) -> int:
    sys = BufferSystem(args.k)
    if args.family == "swap":
        params = SwapParams.swap(args.alpha * np.pi)
    elif args.family == "iswap":
        params = SwapParams.iswap(args.alpha * np.pi)
    else:
        params = _swap_params(args)
    cfg = LossConfig(args.p, args.n, args.samples, args.e_threshold, args.seed)
    est = estimate_q(sys, params, cfg)
    print(f"q_hat = {est.q_hat:.6g} +- {est.stderr:.3g} "
          f"({est.successes}/{cfg.M} trajectories with E >= {cfg.E_threshold})")
    if args.out:
        from .figures import write_csv

        write_csv(args.out,
                  ["k", "alpha_over_pi", "family", "E_threshold", "q_hat",
                   "stderr", "n", "M", "p", "seed"],
                  [[args.k, args.alpha, args.family or "custom",
                    cfg.E_threshold, est.q_hat, est.stderr, cfg.n, cfg.M,
                    cfg.p, cfg.seed]])
        print(f"wrote {args.out}")
    return 0


def _cmd_oracle_check(args) -> int:
    cfg = ExperimentConfig(
        Experiment.ORACLES,
        {"p": args.p, "n": args.n, "seed": args.seed, "samples": args.samples},
        args.out or "out/oracle-check.csv")
    manifest = run(cfg, figure_id="oracle-check")
    with open(manifest.config.output_path, encoding="utf-8") as fh:
        failures = sum(1 for line in fh if line.rstrip().endswith("FAIL"))
    print(f"oracle checks written to {manifest.config.output_path}; "
          f"{'all pass' if failures == 0 else f'{failures} FAILURES'}")
    return 0 if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entbuffer",
        description="entanglement-buffer simulations: named figure runs, "
                    "single experiments, and oracle checks",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    fig = sub.add_parser("figure", help="run a cataloged figure reproduction")
    fig.add_argument("figure_id", nargs="?", help="catalog id, e.g. fig2a")
    fig.add_argument("--out", default="out", help="output directory")
    fig.add_argument("--seed", type=int, default=None)
    fig.add_argument("--samples", type=int, default=None)
    fig.add_argument("--config", default=None,
                     help="key = value file of parameter overrides")
    fig.set_defaults(func=_cmd_figure)

    lst = sub.add_parser("list", help="print the figure catalog")
    lst.add_argument("--json", action="store_true")
    lst.set_defaults(func=_cmd_list)

    def common(p, with_beta=True):
        p.add_argument("--k", type=int, default=1)
        p.add_argument("--alpha", type=float, required=True,
                       help="swap angle in units of pi")
        if with_beta:
            p.add_argument("--beta", type=float, default=None,
                           help="phase angle in units of pi")
        p.add_argument("--out", default=None)

    sc = sub.add_parser("single-copy", help="one caching step from a chosen init")
    common(sc)
    sc.add_argument("--init", choices=["zero", "mixed", "pure"], default="zero")
    sc.add_argument("--theta", type=float, default=0.0, help="units of pi")
    sc.add_argument("--delta", type=float, default=0.0, help="units of pi")
    sc.set_defaults(func=_cmd_single_copy)

    ss = sub.add_parser("steady-state", help="solve the fixed point of the channel")
    common(ss)
    ss.add_argument("--method", choices=["power", "nullspace"], default="power")
    ss.set_defaults(func=_cmd_steady_state)

    lm = sub.add_parser("loss-mc", help="Monte Carlo success rate under loss")
    common(lm)
    lm.add_argument("--family", choices=["swap", "iswap"], default=None,
                    help="overrides --beta with 0 or alpha")
    lm.add_argument("--p", type=float, default=0.5)
    lm.add_argument("--n", type=int, default=10)
    lm.add_argument("--samples", type=int, default=5000)
    lm.add_argument("--e-threshold", type=float, default=1.0)
    lm.add_argument("--seed", type=int, default=2024)
    lm.set_defaults(func=_cmd_loss_mc)

    oc = sub.add_parser("oracle-check",
                        help="exact enumeration vs closed forms vs Monte Carlo")
    oc.add_argument("--p", type=float, default=0.5)
    oc.add_argument("--n", type=int, default=10)
    oc.add_argument("--seed", type=int, default=2024)
    oc.add_argument("--samples", type=int, default=5000)
    oc.add_argument("--out", default=None)
    oc.set_defaults(func=_cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    raise SystemExit(main())
