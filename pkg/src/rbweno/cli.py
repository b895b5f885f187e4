"""Command line front end: solve, bench, convergence, selftest."""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import benchmarks, cdr, hyperbolic, io
from .config import BENCHMARKS, ConfigError, RunConfig, parse_config

EULER_NAMES_1D = ["density", "momentum", "energy"]
EULER_NAMES_2D = ["density", "momentum_x", "momentum_y", "energy"]


def _component_names(m: int, dim: int) -> list:
    if m == 1:
        return ["u"]
    return EULER_NAMES_1D if dim == 1 else EULER_NAMES_2D


def run_benchmark(cfg: RunConfig) -> dict:
    """Dispatch a validated config, write outputs, return the summary."""
    out_dir = cfg.output_dir
    os.makedirs(out_dir, exist_ok=True)

    if benchmarks.is_cdr(cfg.benchmark):
        eps = 1.0 if cfg.benchmark == "cdr_mms" else 1e-4
        scheme = {"galerkin": "galerkin", "low_only": "low_only",
                  "weno": "weno", "rb_weno": "rb_weno"}[cfg.scheme]
        table = cdr.convergence_study(
            benchmarks.cdr_factory(cfg.benchmark, eps),
            dim=2,
            base_n=cfg.elements[0],
            levels=cfg.levels,
            p=cfg.degree,
            variant="cg",
            scheme=scheme,
            weno=cfg.weno_config(),
            omega_mode=cfg.omega_mode,
        )
        path = os.path.join(out_dir, f"{cfg.benchmark}_p{cfg.degree}_{cfg.scheme}.csv")
        io.write_convergence_csv(path, table)
        last = table.rows[-1]
        return {
            "benchmark": cfg.benchmark,
            "levels": cfg.levels,
            "err_L2": last["err_L2"],
            "rate_L2": last["rate_L2"],
            "err_S": last["err_S"],
            "rate_S": last["rate_S"],
            "output": path,
        }

    setup = benchmarks.build_setup(cfg)
    result = hyperbolic.run(setup.problem, setup.integrator, setup.u0, setup.exact)
    space = setup.problem.space
    names = _component_names(setup.problem.model.m, space.dim)

    diag_path = os.path.join(out_dir, cfg.diagnostics_csv or f"{cfg.benchmark}_diag.csv")
    io.write_diagnostics_csv(diag_path, result.diagnostics)
    outputs = [diag_path]
    if space.dim == 1:
        prof_path = os.path.join(out_dir, cfg.profile_csv or f"{cfg.benchmark}_profile.csv")
        io.write_profile_csv(prof_path, space, result.state.u, names)
        outputs.append(prof_path)
    else:
        vtk_path = os.path.join(out_dir, cfg.vtk_file or f"{cfg.benchmark}.vtk")
        fields = {nm: result.state.u[c] for c, nm in enumerate(names)}
        io.write_vtk(vtk_path, space, fields)
        outputs.append(vtk_path)
    return {"benchmark": cfg.benchmark, **result.summary, "outputs": outputs}


def _add_overrides(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--elements", type=int, nargs="+")
    parser.add_argument("--degree", type=int)
    parser.add_argument("--theta", type=float)
    parser.add_argument("--scheme", choices=["galerkin", "low_only", "weno", "rb_weno"])
    parser.add_argument("--cfl", type=float)
    parser.add_argument("--t-final", type=float, dest="t_final")
    parser.add_argument("--out", dest="output_dir")


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    for key in ("degree", "theta", "scheme", "cfl", "t_final", "output_dir"):
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    if getattr(args, "elements", None):
        cfg.elements = tuple(args.elements)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="rbweno",
                                     description="stabilized CG/DG solver suite")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run from a config file")
    p_solve.add_argument("--config", required=True)
    _add_overrides(p_solve)

    p_bench = sub.add_parser("bench", help="run a named benchmark with defaults")
    p_bench.add_argument("name", choices=list(BENCHMARKS))
    _add_overrides(p_bench)

    p_conv = sub.add_parser("convergence", help="mesh refinement study")
    p_conv.add_argument("--problem", choices=["cdr_mms", "cdr_layer"], default="cdr_mms")
    p_conv.add_argument("--levels", type=int, default=4)
    p_conv.add_argument("--base-n", type=int, default=8)
    _add_overrides(p_conv)

    p_self = sub.add_parser("selftest", help="run the built-in property checks")
    p_self.add_argument("--seed", type=int, default=0)

    args = parser.parse_args(argv)

    if args.command == "selftest":
        from .selftest import run_selftest

        return 0 if run_selftest(args.seed) else 1

    try:
        if args.command == "solve":
            with open(args.config) as f:
                cfg = parse_config(f.read())
        elif args.command == "bench":
            cfg = RunConfig(benchmark=args.name, **benchmarks.benchmark_defaults(args.name))
        else:  # convergence
            cfg = RunConfig(benchmark=args.problem,
                            **benchmarks.benchmark_defaults(args.problem))
            cfg.levels = args.levels
            cfg.elements = (args.base_n,)
        cfg = _apply_overrides(cfg, args)
        summary = run_benchmark(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except hyperbolic.SolverBlowUp as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3

    for key, val in summary.items():
        print(f"{key}: {val}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
