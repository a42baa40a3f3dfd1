"""Steady nitrogen shock structures (M0=3) for a list of Mach numbers, written as profiles via the CLI driver."""
import argparse
import logging
from pathlib import Path

from polymoment.cli import execute
from polymoment.config import GridSpec, ShockStructure, SimulationConfig, nitrogen_gas


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mach", type=float, nargs="+", default=[1.53, 1.7, 2.0, 3.2, 3.8, 6.1])
    ap.add_argument("--half-width", type=float, default=3.6, help="domain is [-w, w]")
    ap.add_argument("--cells", type=int, default=240)
    ap.add_argument("--out", default="output/nitrogen")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    for Ma in args.mach:
        cfg = SimulationConfig(experiment=f"nitrogen_Ma{Ma}", gas=nitrogen_gas(0.1), M0=3, t_end=None,
                               initial=ShockStructure(Ma=Ma),
                               grid=GridSpec(-args.half_width, args.half_width, args.cells))
        print(Ma, execute(cfg, Path(args.out)), flush=True)


if __name__ == "__main__":
    main()
