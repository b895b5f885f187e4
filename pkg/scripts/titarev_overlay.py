#!/usr/bin/env python3
"""Run the Titarev-Toro benchmark with three schemes and write the profile
CSVs consumed by the plotting frontend:

    python scripts/titarev_overlay.py --elements 500 --degree 2 --out out/tt
    cd frontend && npm run build && node dist/cli.js profiles \
        --out ../out/tt/overlay.svg --field density \
        DG-WENO=../out/tt/weno.csv \
        RB-WENO-1.0=../out/tt/rb1.csv \
        RB-WENO-10.0=../out/tt/rb10.csv
"""

import argparse
import os

from rbweno import benchmarks, hyperbolic, io
from rbweno.config import RunConfig

RUNS = [
    ("weno.csv", "weno", 1.0),
    ("rb1.csv", "rb_weno", 1.0),
    ("rb10.csv", "rb_weno", 10.0),
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--elements", type=int, default=500)
    ap.add_argument("--degree", type=int, default=2)
    ap.add_argument("--t-final", type=float, default=5.0)
    ap.add_argument("--out", default="out/tt")
    args = ap.parse_args()

    os.makedirs(args.out, exist_ok=True)
    for fname, scheme, theta in RUNS:
        cfg = RunConfig(benchmark="titarev_toro",
                        **benchmarks.benchmark_defaults("titarev_toro"))
        cfg.elements = (args.elements,)
        cfg.degree = args.degree
        cfg.t_final = args.t_final
        cfg.scheme = scheme
        cfg.theta = theta
        cfg.validate()
        setup = benchmarks.build_setup(cfg)
        result = hyperbolic.run(setup.problem, setup.integrator, setup.u0)
        path = os.path.join(args.out, fname)
        io.write_profile_csv(path, setup.problem.space, result.state.u,
                             ["density", "momentum", "energy"])
        print(f"{fname}: steps={result.steps} "
              f"rho=[{result.summary['min'][0]:.4f}, {result.summary['max'][0]:.4f}]")


if __name__ == "__main__":
    main()
