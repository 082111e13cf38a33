"""R and MSE of fixed transforms (and optionally the optimized one) over alpha.

    python scripts/criteria_vs_alpha.py --rho 0 --out levy.csv
    python scripts/criteria_vs_alpha.py --rho 0.9 --optimize --out ar1.csv
"""
import argparse
import csv
import math

import numpy as np

from sasica.criteria import mse_criterion, redundancy_R
from sasica.model import ModelParams, build_mixing
from sasica.optimizer import OptimizerOptions, optimize
from sasica.transforms import make_transform


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rho", type=float, default=0.0, help="0 gives the Levy case")
    ap.add_argument("--N", type=int, default=64)
    ap.add_argument("--sigma", type=float, default=1.0)
    ap.add_argument("--alphas", type=float, nargs="+", default=np.round(np.arange(0.2, 2.01, 0.2), 2))
    ap.add_argument("--optimize", action="store_true")
    ap.add_argument("--out", default="criteria_vs_alpha.csv")
    args = ap.parse_args()

    kappa = 0.0 if args.rho == 0 else -math.log(args.rho)
    names = ["identity", "dct", "haar"] + (["opwav"] if kappa > 0 else [])
    header = ["alpha"] + [f"R_{n}" for n in names] + [f"MSE_{n}" for n in names]
    if args.optimize:
        header += ["R_opt", "MSE_opt"]

    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for a in args.alphas:
            p = ModelParams(alpha=float(a), kappa=kappa, N=args.N, sigma=args.sigma)
            Linv = build_mixing(p)
            Hs = [make_transform(n, p) for n in names]
            row = [a] + [redundancy_R(H, Linv, a).value for H in Hs]
            row += [mse_criterion(H, Linv, a, args.sigma).value for H in Hs]
            if args.optimize:
                row += [optimize(p, k, OptimizerOptions()).value for k in ("R", "MSE")]
            w.writerow(row)
            print(" ".join(f"{v:.5g}" for v in row), flush=True)


if __name__ == "__main__":
    main()
