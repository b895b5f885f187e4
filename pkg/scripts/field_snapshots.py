#!/usr/bin/env python3
"""Run a 2D benchmark and dump a VTK snapshot for the frontend field map.

    python scripts/field_snapshots.py kelvin_helmholtz --elements 64
    node frontend/dist/cli.js field out/fields/kelvin_helmholtz.vtk \
        --field density --out out/fields/kh.svg
"""

import argparse
import os

from rbweno import benchmarks, hyperbolic, io
from rbweno.cli import _component_names
from rbweno.config import RunConfig


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("benchmark", choices=["sbr", "kpp", "kelvin_helmholtz", "double_mach"])
    ap.add_argument("--elements", type=int, nargs="+", default=None)
    ap.add_argument("--t-final", type=float, default=None)
    ap.add_argument("--scheme", default=None)
    ap.add_argument("--out", default="out/fields")
    args = ap.parse_args()

    cfg = RunConfig(benchmark=args.benchmark, **benchmarks.benchmark_defaults(args.benchmark))
    if args.elements:
        cfg.elements = tuple(args.elements)
    if args.t_final is not None:
        cfg.t_final = args.t_final
    if args.scheme:
        cfg.scheme = args.scheme
    cfg.validate()

    setup = benchmarks.build_setup(cfg)
    result = hyperbolic.run(setup.problem, setup.integrator, setup.u0)
    os.makedirs(args.out, exist_ok=True)
    space = setup.problem.space
    names = _component_names(setup.problem.model.m, space.dim)
    path = os.path.join(args.out, f"{args.benchmark}.vtk")
    io.write_vtk(path, space, {nm: result.state.u[c] for c, nm in enumerate(names)})
    print(f"wrote {path}; steps={result.steps}, "
          f"min={result.summary['min']}, max={result.summary['max']}")


if __name__ == "__main__":
    main()
