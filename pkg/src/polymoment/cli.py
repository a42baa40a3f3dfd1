"""Command-line driver: run a config, run a preset bundle, compare two profiles."""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .config import (ConfigError, GasModel, GridSpec, ShockStructure, ShockTube, SimulationConfig,
                     config_to_dict, nitrogen_gas, parse_config)
from .dvm import run_dvm
from .profiles import RunManifest, compare_profiles, output_root, read_profile, write_profile
from .solver import run

log = logging.getLogger("polymoment")


def _shock_tube(name, Kn, M0, **kw) -> SimulationConfig:
    gas = GasModel(Kn=Kn, Pr=kw.pop("Pr", 0.72), Z=kw.pop("Z", 5.0))
    return SimulationConfig(experiment=name, gas=gas, M0=M0, t_end=0.3, **kw)


def _convergence(Kn: float, orders: Sequence[int]) -> list[SimulationConfig]:
    tag = f"shock_tube_kn{Kn:g}"
    runs = [_shock_tube(f"{tag}_m{M}", Kn, M) for M in orders]
    runs.append(dataclasses.replace(_shock_tube(f"{tag}_dvm", Kn, 5), solver="dvm"))
    return runs


def _presets() -> dict[str, list[SimulationConfig]]:
    return {
        "shock_tube_kn0.05": _convergence(0.05, range(3, 9)),
        "shock_tube_kn0.5": _convergence(0.5, range(3, 21)),
        "shock_tube_kn5": _convergence(5.0, range(3, 25, 3)),
        "bgk_vs_esbgk": [_shock_tube("esbgk", 0.05, 5),
                         _shock_tube("bgk", 0.05, 5, Pr=1.0, Z=1.0)],
        "monatomic_limit": [_shock_tube(f"monatomic_limit_z{Z:g}", 0.01, 5, Pr=2.0 / 3.0, Z=Z)
                            for Z in (1.0, 10.0, 100.0, 1000.0)],
        "nitrogen_shock": [SimulationConfig(experiment=f"nitrogen_ma{Ma:g}", gas=nitrogen_gas(0.1),
                                            M0=3, t_end=None, initial=ShockStructure(Ma=Ma),
                                            grid=GridSpec(-1.5, 1.5, 600))
                           for Ma in (1.53, 1.7, 2.0, 3.2, 3.8, 6.1)],
    }


PRESETS = _presets()


def execute(config: SimulationConfig, out_dir: Optional[Path] = None) -> Path:
    """Run one configuration and write its profiles and manifest; returns the run directory."""
    root = (out_dir or output_root(config)) / config.experiment
    root.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    if config.solver == "dvm":
        result = run_dvm(config)
        steady = None
    else:
        result = run(config)
        steady = result.steady
    wall = time.perf_counter() - start
    files = []
    for i, snap in enumerate(result.snapshots):
        name = f"profile_{i:04d}.dat"
        meta = {"experiment": config.experiment, "solver": config.solver, "t": f"{snap.t:.12g}",
                "step": snap.step, "M0": config.M0, "Kn": config.gas.Kn}
        write_profile(snap.grid, root / name, config, meta)
        files.append({"file": name, "t": snap.t, "step": snap.step})
    manifest = RunManifest(config.experiment, config_to_dict(config), __version__, wall, files,
                           result.steps, steady)
    manifest.write(root / "manifest.json")
    log.info("%s: %d steps, %.1f s -> %s", config.experiment, result.steps, wall, root)
    return root


def _cmd_run(args) -> int:
    config = parse_config(Path(args.config).read_text())
    path = execute(config, Path(args.output) if args.output else None)
    print(path)
    return 0


def _cmd_preset(args) -> int:
    if args.list or not args.name:
        for name, runs in PRESETS.items():
            print(f"{name}: {', '.join(c.experiment for c in runs)}")
        return 0
    if args.name not in PRESETS:
        raise ConfigError(f"unknown preset '{args.name}' (known: {', '.join(PRESETS)})")
    for config in PRESETS[args.name]:
        if args.only and args.only not in config.experiment:
            continue
        if args.cells:
            g = config.grid
            config = dataclasses.replace(config, grid=GridSpec(g.x_min, g.x_max, args.cells))
        print(execute(config, Path(args.output) if args.output else None))
    return 0


def _cmd_compare(args) -> int:
    a, _ = read_profile(args.a)
    b, _ = read_profile(args.b)
    print(f"{'column':<10} {'L1':>14} {'Linf':>14}")
    for name, d in compare_profiles(a, b).items():
        print(f"{name:<10} {d['L1']:14.6e} {d['Linf']:14.6e}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polymoment", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a YAML configuration")
    r.add_argument("config")
    r.add_argument("-o", "--output", help="output directory (overrides config and environment)")
    r.set_defaults(func=_cmd_run)
    s = sub.add_parser("preset", help="run a bundled experiment family")
    s.add_argument("name", nargs="?")
    s.add_argument("--list", action="store_true")
    s.add_argument("--only", help="run only experiments whose id contains this text")
    s.add_argument("--cells", type=int, help="override the number of cells")
    s.add_argument("-o", "--output")
    s.set_defaults(func=_cmd_preset)
    c = sub.add_parser("compare", help="L1 / Linf differences of two profiles")
    c.add_argument("a")
    c.add_argument("b")
    c.set_defaults(func=_cmd_compare)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except Exception as exc:            # report and exit nonzero
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
