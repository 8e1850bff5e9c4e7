"""Third total u1-derivative of H1 at u1 = 0: finite-difference stencil vs both closed forms.

    python3 scripts/order3_check.py --u2 0.1,0.5,2
"""

import argparse

from gueflow import hamiltonian as ham
from gueflow.flows import IntegratorConfig, flow_u1, reach

TIGHT = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14)


def stencil(base, d):
    h = [ham.eval_H1(flow_u1(base, a, TIGHT).terminal) for a in (2 * d, d, -d, -2 * d)]
    return ((h[0] - 2 * h[1] + 2 * h[2] - h[3]) / (2 * d**3)).real


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--u2", default="0.1,0.5,2")
    args = ap.parse_args()
    print(f"{'u2':>6} {'d=0.05':>12} {'d=0.025':>12} {'richardson':>12} {'derived':>12} {'published':>12}")
    for u in (float(v) for v in args.u2.split(",")):
        base = reach(0.0, u, TIGHT)
        r = ham.reduce(base)
        s1, s2 = stencil(base, 0.05), stencil(base, 0.025)
        der = ham.dH1_du1_total_at_zero(r, 3).real
        pub = ham.dH1_du1_total_at_zero(r, 3, closed_form="published").real
        print(f"{u:6.3g} {s1:12.6g} {s2:12.6g} {(4 * s2 - s1) / 3:12.6g} {der:12.6g} {pub:12.6g}")


if __name__ == "__main__":
    main()
