"""Run configuration: gas model, grid, initial data, output; YAML round trip."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Any, Optional, Union

import numpy as np
import yaml


class ConfigError(ValueError):
    pass


@dataclass
class GasModel:
    """Physical parameters.  ``viscosity``/``relaxation`` select the mu and Z models."""

    Kn: float = 0.05
    Pr: float = 0.72
    Z: float = 5.0
    R: float = 1.0
    delta: float = 2.0
    viscosity: str = "linear"       # mu = Kn T_eq
    relaxation: str = "constant"    # Z fixed

    def __post_init__(self):
        if not self.Kn > 0:
            raise ConfigError("gas.Kn must be positive")
        if not self.Pr > 0:
            raise ConfigError("gas.Pr must be positive")
        if not self.Z >= 1:
            raise ConfigError("gas.Z must be >= 1")
        if not (self.R > 0 and self.delta > 0):
            raise ConfigError("gas.R and gas.delta must be positive")
        if self.viscosity not in ("linear", "nitrogen"):
            raise ConfigError("gas.viscosity must be 'linear' or 'nitrogen'")
        if self.relaxation not in ("constant", "nitrogen"):
            raise ConfigError("gas.relaxation must be 'constant' or 'nitrogen'")

    def mu(self, T_eq):
        T_eq = np.asarray(T_eq, dtype=float)
        if self.viscosity == "linear":
            return self.Kn * T_eq
        return 0.625 * math.sqrt(0.5 * math.pi) * self.Kn * T_eq ** 0.72

    def collision_number(self, T_tr, T_int):
        T_tr = np.asarray(T_tr, dtype=float)
        if self.relaxation == "constant":
            return np.full(T_tr.shape, float(self.Z))
        return 1.45 * (1.0 + 0.75 * np.asarray(T_int) / T_tr)


@dataclass
class ShockTube:
    rho_l: float = 7.0
    T_l: float = 1.0
    rho_r: float = 1.0
    T_r: float = 1.0
    type: str = "shock_tube"

    def __post_init__(self):
        if min(self.rho_l, self.T_l, self.rho_r, self.T_r) <= 0:
            raise ConfigError("shock tube densities and temperatures must be positive")


@dataclass
class ShockStructure:
    Ma: float = 1.53
    gamma: float = 1.4
    type: str = "shock_structure"

    def __post_init__(self):
        if not self.Ma > 1:
            raise ConfigError("initial.Ma must exceed 1")
        if not self.gamma > 1:
            raise ConfigError("initial.gamma must exceed 1")

    def states(self):
        """Upstream and Rankine-Hugoniot downstream (rho, u1, T)."""
        g, Ma = self.gamma, self.Ma
        u_l = math.sqrt(g) * Ma
        rho_r = (g + 1) * Ma ** 2 / ((g - 1) * Ma ** 2 + 2)
        T_r = (2 * g * Ma ** 2 - (g - 1)) / ((g + 1) * rho_r)
        return (1.0, u_l, 1.0), (rho_r, u_l / rho_r, T_r)


@dataclass
class GridSpec:
    x_min: float
    x_max: float
    n_cells: int

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ConfigError("grid.x_max must exceed grid.x_min")
        if self.n_cells < 4:
            raise ConfigError("grid.n_cells must be >= 4")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells


@dataclass
class DVMOptions:
    n_v: int = 400
    width: float = 8.0
    second_order: bool = False

    def __post_init__(self):
        if self.n_v < 8:
            raise ConfigError("dvm.n_v must be >= 8")


@dataclass
class OutputSpec:
    dir: str = "output"
    snapshot_every: Optional[float] = None   # None: final state only


@dataclass
class SimulationConfig:
    experiment: str = "run"
    solver: str = "moment"          # "moment" or "dvm"
    gas: GasModel = field(default_factory=GasModel)
    M0: int = 5
    cfl: float = 0.95
    t_end: Optional[float] = 0.3
    steady_tol: float = 1e-6
    steady_window: int = 100
    max_steps: int = 1_000_000
    projection_method: str = "exact"   # "exact" or "rk4"
    projection_substeps: int = 32
    grid: Optional[GridSpec] = None
    initial: Union[ShockTube, ShockStructure] = field(default_factory=ShockTube)
    dvm: DVMOptions = field(default_factory=DVMOptions)
    output: OutputSpec = field(default_factory=OutputSpec)
    boundary: Optional[str] = None     # "zero_gradient" or "fixed"; None picks by initial condition

    def __post_init__(self):
        if self.solver not in ("moment", "dvm"):
            raise ConfigError("solver must be 'moment' or 'dvm'")
        if self.M0 < 3:
            raise ConfigError(f"M0={self.M0} rejected: M0 >= 3 is required (M1 = M0 - 2 must be "
                              "non-negative and the closure needs degree M0 + 1 couplings)")
        if not 0 < self.cfl < 1:
            raise ConfigError("cfl must lie in (0, 1)")
        if self.t_end is not None and not self.t_end > 0:
            raise ConfigError("t_end must be positive (or null for a steady-state run)")
        if self.projection_method not in ("exact", "rk4"):
            raise ConfigError("projection_method must be 'exact' or 'rk4'")
        if self.projection_substeps < 1:
            raise ConfigError("projection_substeps must be >= 1")
        if self.boundary is None:
            # a standing shock needs its far-field states pinned; copy ghosts let it drift
            self.boundary = "fixed" if isinstance(self.initial, ShockStructure) else "zero_gradient"
        if self.boundary not in ("zero_gradient", "fixed"):
            raise ConfigError("boundary must be 'zero_gradient' or 'fixed'")
        if self.grid is None:
            if isinstance(self.initial, ShockStructure):
                self.grid = GridSpec(-1.5, 1.5, 600)
            else:
                self.grid = GridSpec(-2.0, 2.0, 400)


_SECTIONS = {"gas": GasModel, "grid": GridSpec, "dvm": DVMOptions, "output": OutputSpec}
_INITIAL = {"shock_tube": ShockTube, "shock_structure": ShockStructure}


def _build(cls, data: Any, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected a mapping")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")
    try:
        return cls(**data)
    except TypeError as exc:            # wrong value types surface here too
        raise ConfigError(f"{where}: {exc}") from None


def config_from_dict(data: dict) -> SimulationConfig:
    if not isinstance(data, dict):
        raise ConfigError("top level: expected a mapping")
    data = dict(data)
    kwargs: dict[str, Any] = {}
    for key, cls in _SECTIONS.items():
        if key in data:
            kwargs[key] = _build(cls, data.pop(key) or {}, key)
    if "initial" in data:
        init = dict(data.pop("initial") or {})
        kind = init.get("type", "shock_tube")
        if kind not in _INITIAL:
            raise ConfigError(f"initial.type: unknown initial condition '{kind}'")
        kwargs["initial"] = _build(_INITIAL[kind], init, "initial")
    top = {f.name for f in dataclasses.fields(SimulationConfig)} - set(_SECTIONS) - {"initial"}
    unknown = sorted(set(data) - top)
    if unknown:
        raise ConfigError(f"top level: unknown key(s) {', '.join(unknown)}")
    kwargs.update(data)
    if isinstance(kwargs.get("initial"), ShockStructure) and "gas" not in kwargs:
        kwargs["gas"] = nitrogen_gas()
    try:
        return SimulationConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"top level: {exc}") from None


def parse_config(text: str) -> SimulationConfig:
    """Parse YAML text into a validated :class:`SimulationConfig`."""
    try:
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        raise ConfigError(f"YAML parse error at {where}: {exc.problem}") from None
    return config_from_dict(data or {})


def config_to_dict(config: SimulationConfig) -> dict:
    return dataclasses.asdict(config)


def serialize_config(config: SimulationConfig) -> str:
    return yaml.safe_dump(config_to_dict(config), sort_keys=False)


def nitrogen_gas(Kn: float = 0.1) -> GasModel:
    return GasModel(Kn=Kn, Pr=0.72, Z=1.0, viscosity="nitrogen", relaxation="nitrogen")
