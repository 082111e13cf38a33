"""Multi-start minimization of R and comparison of the result with known bases.

Saves the best matrix and prints its aligned distance to the DCT, the model
KLT, Haar and the matched wavelet basis.
"""
import argparse
import math

import numpy as np

from sasica.criteria import redundancy_R
from sasica.model import ModelParams, build_mixing
from sasica.optimizer import OptimizerOptions, match_basis, multistart
from sasica.transforms import make_transform


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--rho", type=float, default=0.9)
    ap.add_argument("--N", type=int, default=16)
    ap.add_argument("--starts", type=int, default=5)
    ap.add_argument("--criterion", default="R", choices=["R", "MSE"])
    ap.add_argument("--out", default="ica_H.csv")
    args = ap.parse_args()

    kappa = 0.0 if args.rho == 0 else -math.log(args.rho)
    p = ModelParams(alpha=args.alpha, kappa=kappa, N=args.N)
    best, runs = multistart(p, args.criterion, OptimizerOptions(init="random"),
                            seeds=range(args.starts))
    np.savetxt(args.out, best.H_opt.entries, delimiter=",")
    print("start values:", [round(r.value, 6) for r in runs])
    print(f"best {args.criterion}: {best.value:.6f}")
    Linv = build_mixing(p)
    for name in ("dct", "klt", "haar", "opwav"):
        ref = make_transform(name, p)
        d = match_basis(best.H_opt, ref)[0]
        print(f"{name:6s} R={redundancy_R(ref, Linv, args.alpha).value:.6f} distance={d:.4f}")


if __name__ == "__main__":
    main()
