"""Spatial self-convergence of the moment solver on the Kn=0.05 shock tube (cell-averaged L1 differences)."""
import argparse

import numpy as np

from polymoment.config import GasModel, GridSpec, SimulationConfig
from polymoment.moments import recover_macroscopic
from polymoment.solver import run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cells", type=int, nargs="+", default=[200, 400, 800])
    ap.add_argument("--M0", type=int, default=5)
    ap.add_argument("--t-end", type=float, default=0.1)
    args = ap.parse_args()

    rho = {}
    for n in args.cells:
        cfg = SimulationConfig(gas=GasModel(Kn=0.05), M0=args.M0, t_end=args.t_end, grid=GridSpec(-2.0, 2.0, n))
        rho[n] = recover_macroscopic(run(cfg).final.grid.cells).rho
    for a, b in zip(args.cells, args.cells[1:]):
        fine = rho[b].reshape(a, -1).mean(axis=1)
        print(f"{a:>5} -> {b:<5} L1 diff {np.abs(fine - rho[a]).sum() * 4.0 / a:.3e}")


if __name__ == "__main__":
    main()
