"""Minimized R as a function of the block size N (Levy case by default)."""
import argparse
import math

from sasica.criteria import redundancy_R
from sasica.model import ModelParams, build_mixing
from sasica.optimizer import OptimizerOptions, optimize
from sasica.transforms import haar_matrix


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.5, 1.0, 1.5])
    ap.add_argument("--rho", type=float, default=0.0)
    ap.add_argument("--Ns", type=int, nargs="+", default=[4, 8, 16, 32, 64])
    args = ap.parse_args()

    kappa = 0.0 if args.rho == 0 else -math.log(args.rho)
    print(f"{'alpha':>6} {'N':>4} {'R_haar':>10} {'R_min':>10}")
    for a in args.alphas:
        for N in args.Ns:
            p = ModelParams(alpha=a, kappa=kappa, N=N)
            r_haar = redundancy_R(haar_matrix(N), build_mixing(p), a).value
            res = optimize(p, "R", OptimizerOptions(init="haar"))
            print(f"{a:6.2f} {N:4d} {r_haar:10.5f} {res.value:10.5f}", flush=True)


if __name__ == "__main__":
    main()
