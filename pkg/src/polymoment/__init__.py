"""Hermite-Laguerre moment method for the diatomic ES-BGK equation in 1D."""
from .config import GasModel, ShockStructure, ShockTube, SimulationConfig, parse_config, serialize_config
from .moments import (ExpansionFrame, InvalidStateError, MacroscopicState, MomentCoefficients,
                      recover_macroscopic, total_moment_count)
from .projection import project
from .solver import Grid1D, compute_dt, hll_step, init_shock_structure, init_shock_tube, run

__version__ = "0.1.0"
