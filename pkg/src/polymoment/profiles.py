"""Plain-text profile files, profile comparison and run manifests."""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .config import ShockStructure, SimulationConfig, config_to_dict
from .dvm import DVMGrid, reduce_macroscopic
from .moments import MacroscopicState, recover_macroscopic
from .solver import Grid1D

BASE_COLUMNS = ("x", "rho", "u1", "T_tr", "T_int", "T_eq", "q1", "sigma11")
SHOCK_COLUMNS = ("rho_hat", "T_tr_hat", "T_int_hat")


def macroscopic_of(grid: Union[Grid1D, DVMGrid]) -> MacroscopicState:
    if isinstance(grid, DVMGrid):
        return reduce_macroscopic(grid.state)
    return recover_macroscopic(grid.cells)


def profile_columns(grid: Union[Grid1D, DVMGrid], config: Optional[SimulationConfig] = None) -> dict:
    m = macroscopic_of(grid)
    cols = {"x": grid.centers, "rho": m.rho, "u1": m.u[:, 0], "T_tr": m.T_tr, "T_int": m.T_int,
            "T_eq": m.T_eq, "q1": m.q1, "sigma11": m.sigma11}
    if config is not None and isinstance(config.initial, ShockStructure):
        (rl, _, Tl), (rr, _, Tr) = config.initial.states()
        cols["rho_hat"] = (m.rho - rl) / (rr - rl)
        cols["T_tr_hat"] = (m.T_tr - Tl) / (Tr - Tl)
        cols["T_int_hat"] = (m.T_int - Tl) / (Tr - Tl)
    return cols


def write_profile(grid: Union[Grid1D, DVMGrid], path: Union[str, Path],
                  config: Optional[SimulationConfig] = None, metadata: Optional[dict] = None) -> Path:
    """Write one row per cell; metadata goes in leading '#' lines."""
    path = Path(path)
    cols = profile_columns(grid, config)
    names = list(cols)
    data = np.column_stack([cols[n] for n in names])
    lines = [f"# {k}: {v}" for k, v in (metadata or {}).items()]
    lines.append(" ".join(names))
    lines.extend(" ".join(f"{v:.16e}" for v in row) for row in data)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    return path


def read_profile(path: Union[str, Path]) -> tuple[dict, dict]:
    """Return (columns, metadata) of a profile file."""
    meta, header, rows = {}, None, []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            meta[key.strip()] = value.strip()
        elif header is None:
            header = line.split()
        else:
            rows.append([float(v) for v in line.split()])
    if header is None:
        raise ValueError(f"{path}: no header row")
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    return {name: data[:, i] for i, name in enumerate(header)}, meta


def compare_profiles(a: dict, b: dict) -> dict:
    """Per-column L1 (integrated over x) and max-norm differences on a shared grid."""
    if len(a["x"]) != len(b["x"]) or not np.allclose(a["x"], b["x"], rtol=0, atol=1e-12):
        raise ValueError("profiles are on different grids")
    dx = float(np.mean(np.diff(a["x"]))) if len(a["x"]) > 1 else 1.0
    out = {}
    for name in a:
        if name == "x" or name not in b:
            continue
        d = np.abs(a[name] - b[name])
        out[name] = {"L1": float(d.sum() * dx), "Linf": float(d.max())}
    return out


@dataclass
class RunManifest:
    experiment: str
    config: dict
    code_version: str
    wall_time: float
    snapshots: list[dict] = field(default_factory=list)
    steps: int = 0
    steady: Optional[bool] = None

    def write(self, path: Union[str, Path]) -> Path:
        root = Path(path).parent
        missing = [s["file"] for s in self.snapshots if not (root / s["file"]).exists()]
        if missing:
            raise FileNotFoundError(f"manifest references missing snapshots: {missing}")
        Path(path).write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")
        return Path(path)


def output_root(config: SimulationConfig) -> Path:
    return Path(os.environ.get("POLYMOMENT_OUTPUT_DIR") or config.output.dir)
