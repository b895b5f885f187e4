#!/usr/bin/env python3
"""Mesh-refinement studies for the steady CDR problems.

Writes one convergence CSV per (degree, scheme) combination; render tables
with the frontend:  node frontend/dist/cli.js rates out/conv/cdr_mms_p1_high_order.csv
"""

import argparse
import os

from rbweno import benchmarks, io
from rbweno.cdr import convergence_study


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--problem", choices=["cdr_mms", "cdr_layer"], default="cdr_mms")
    ap.add_argument("--levels", type=int, default=4)
    ap.add_argument("--base-n", type=int, default=8)
    ap.add_argument("--eps", type=float, default=None)
    ap.add_argument("--out", default="out/conv")
    args = ap.parse_args()

    os.makedirs(args.out, exist_ok=True)
    factory = benchmarks.cdr_factory(args.problem, args.eps)
    for p in (1, 2):
        for scheme in ("high_order", "weno", "rb_weno"):
            tab = convergence_study(factory, 2, args.base_n, args.levels, p,
                                    "cg", scheme)
            path = os.path.join(args.out, f"{args.problem}_p{p}_{scheme}.csv")
            io.write_convergence_csv(path, tab)
            last = tab.rows[-1]
            print(f"p={p} {scheme:>10}: err_L2={last['err_L2']:.3e} "
                  f"rate_L2={last['rate_L2']:.2f} rate_S={last['rate_S']:.2f}")


if __name__ == "__main__":
    main()
