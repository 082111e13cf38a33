"""Large-N comparison of the DCT and the matched wavelet basis.

Prints R and MSE for growing N next to the limiting values and bounds.
"""
import argparse
import math

from sasica import asymptotics


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--rho", type=float, default=0.0)
    ap.add_argument("--sigma", type=float, default=1.0)
    ap.add_argument("--Ns", type=int, nargs="+", default=[16, 64, 256, 1024])
    ap.add_argument("--csv", default=None)
    args = ap.parse_args()

    kappa = 0.0 if args.rho == 0 else -math.log(args.rho)
    table = asymptotics.nu_table_for(kappa, 1.0, args.alpha, args.sigma, args.Ns)
    rep = asymptotics.theorem1_check(kappa, 1.0, args.alpha, args.sigma, args.Ns, nu_table=table)
    print(f"{'N':>6} {'R_dct':>10} {'R_wav':>10} {'MSE_dct':>10} {'MSE_wav':>10}")
    for N, rd, rw, md, mw in rep.rows:
        print(f"{N:6d} {rd:10.5f} {rw:10.5f} {md:10.5f} {mw:10.5f}")
    print(f"limit R(wavelet) = {rep.limit_R:.6f} <= {rep.limit_R_bound:.6f}")
    print(f"limit MSE(wavelet) = "
          f"{asymptotics.limit_mse_opwt(kappa, 1.0, args.alpha, args.sigma):.6f} "
          f"<= {rep.mse_bound:.6f}")
    if args.csv:
        rep.to_csv(args.csv)


if __name__ == "__main__":
    main()
