"""Compare the two readings of the general seed against a flow from the u1 = 0 seed.

The seed at (ut1 * sqrt(u2), u2) is compared with the state reached by flowing
the u1 = 0 seed along u1; per-coordinate relative errors are printed.

    python3 scripts/phi1_crosscheck.py --ut1 0.5 --u2 1e-4,3e-5,1e-5
"""

import argparse
import math

import numpy as np

from gueflow.flows import IntegratorConfig, flow_u1
from gueflow.seeds import seed_general, seed_u1zero

TIGHT = IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ut1", type=float, default=0.5)
    ap.add_argument("--u2", default="1e-4,3e-5,1e-5")
    args = ap.parse_args()
    print(f"{'u2':>8} {'reading':>8} " + " ".join(f"{c:>10}" for c in ("P1", "Q1", "P2", "Q2")))
    for u in (float(v) for v in args.u2.split(",")):
        ref = flow_u1(seed_u1zero(u).state, args.ut1 * math.sqrt(u), TIGHT).terminal.coords()
        for reading in ("flow", "literal"):
            got = seed_general(args.ut1, u, reading=reading).state.coords()
            err = np.abs(got - ref) / np.abs(ref)
            print(f"{u:8.1e} {reading:>8} " + " ".join(f"{e:10.2e}" for e in err))


if __name__ == "__main__":
    main()
