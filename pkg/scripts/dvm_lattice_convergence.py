"""Self-convergence of the DVM reference under velocity-lattice doubling (shock tube, Kn=0.05)."""
import argparse

import numpy as np

from polymoment.config import DVMOptions, GasModel, GridSpec, SimulationConfig
from polymoment.dvm import reduce_macroscopic, run_dvm


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cells", type=int, default=100)
    ap.add_argument("--t-end", type=float, default=0.1)
    ap.add_argument("--lattices", type=int, nargs="+", default=[16, 32, 64, 128, 256, 512])
    args = ap.parse_args()

    dx = 4.0 / args.cells
    rho = {}
    for n_v in args.lattices:
        cfg = SimulationConfig(solver="dvm", gas=GasModel(Kn=0.05), grid=GridSpec(-2.0, 2.0, args.cells),
                               t_end=args.t_end, dvm=DVMOptions(n_v=n_v))
        rho[n_v] = reduce_macroscopic(run_dvm(cfg).final.grid.state).rho
    prev = None
    for a, b in zip(args.lattices, args.lattices[1:]):
        d = np.abs(rho[b] - rho[a]).sum() * dx
        order = "" if prev is None else f"  order {np.log2(prev / d):.2f}"
        print(f"{a:>5} -> {b:<5} L1 diff {d:.3e}{order}")
        prev = d


if __name__ == "__main__":
    main()
