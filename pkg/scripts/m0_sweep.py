"""Shock tube at Kn=0.05, t=0.3: L1 density error of the moment solver against the DVM reference for a range of M0."""
import argparse
import time

import numpy as np

from polymoment.config import DVMOptions, GasModel, GridSpec, SimulationConfig
from polymoment.dvm import reduce_macroscopic, run_dvm
from polymoment.moments import recover_macroscopic
from polymoment.solver import run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cells", type=int, default=400)
    ap.add_argument("--orders", type=int, nargs="+", default=[3, 4, 5, 6])
    ap.add_argument("--Kn", type=float, default=0.05)
    ap.add_argument("--first-order-dvm", action="store_true", help="use the first-order upwind DVM reference")
    args = ap.parse_args()

    base = dict(gas=GasModel(Kn=args.Kn, Pr=0.72, Z=5.0), t_end=0.3, grid=GridSpec(-2.0, 2.0, args.cells))
    dvm = SimulationConfig(solver="dvm", dvm=DVMOptions(second_order=not args.first_order_dvm), **base)
    ref = reduce_macroscopic(run_dvm(dvm).final.grid.state).rho
    norm = np.abs(ref).sum()
    print(f"{'M0':>4} {'rel L1':>10} {'wall s':>8}")
    for M0 in args.orders:
        t0 = time.time()
        rho = recover_macroscopic(run(SimulationConfig(M0=M0, **base)).final.grid.cells).rho
        print(f"{M0:>4} {np.abs(rho - ref).sum() / norm:>10.3e} {time.time() - t0:>8.1f}", flush=True)


if __name__ == "__main__":
    main()
