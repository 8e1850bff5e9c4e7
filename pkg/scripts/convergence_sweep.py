"""Oracle vs asymptotic log-derivatives over N, split by the parity of N.

    python3 scripts/convergence_sweep.py --N 4,5,9,10,16,17,25,26,36,49 --u1 0.4 --u2 0.5
"""

import argparse
import math

from gueflow import hamiltonian as ham
from gueflow.flows import reach
from gueflow.oracle import WeightParams, log_E, oracle_report
from gueflow.predictor import predict_logderivs, predict_logE


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", default="4,9,16,25,36,49")
    ap.add_argument("--u1", type=float, default=0.4)
    ap.add_argument("--u2", type=float, default=0.5)
    args = ap.parse_args()
    H2 = ham.eval_H2(reach(0.0, args.u2)).real
    print(f"{'N':>4} {'par':>4} {'res_dz(t=0)':>12} {'res_dt':>12} {'res_dt*sqrtN':>12} {'logE gap':>12}")
    for N in (int(n) for n in args.N.split(",")):
        z, t = math.sqrt(args.u2 / N), args.u1 / math.sqrt(N)
        dz = oracle_report(WeightParams(z, 0.0, N)).dlogE_dz
        res_dz = abs(dz + 2 * z * N * H2)
        res_dt = abs(oracle_report(WeightParams(z, t, N)).dlogE_dt - predict_logderivs(N, z, t)[0])
        gap = predict_logE(N, z, 0.0, with_derivs=False).log_E_pred - log_E(WeightParams(z, 0.0, N))
        par = "odd" if N % 2 else "even"
        print(f"{N:>4} {par:>4} {res_dz:12.4e} {res_dt:12.4e} {res_dt * math.sqrt(N):12.4e} {gap:12.4e}")


if __name__ == "__main__":
    main()
