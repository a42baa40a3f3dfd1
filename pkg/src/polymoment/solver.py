"""1D finite-volume driver: initial data, HLL transport with closure, collision splitting."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

import numpy as np

from .basis import hermite_max_root
from .closure import ClosureInput, augment, closure_coefficients
from .config import ShockStructure, ShockTube, SimulationConfig
from .esbgk import CollisionParameters, collision_step
from .moments import (ExpansionFrame, InvalidStateError, MomentCoefficients, conserved_moments,
                      enforce_normal, equilibrium_temperature, impose_conserved_moments)
from .projection import multiply_by_xi, project

log = logging.getLogger(__name__)


@dataclass
class Grid1D:
    x_min: float
    x_max: float
    cells: MomentCoefficients

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        if self.cells.batch_shape != (self.n_cells,) or self.n_cells < 4:
            raise ValueError("cells must be a 1D batch of at least 4 states")

    @property
    def n_cells(self) -> int:
        return self.cells.f0.shape[0]

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx

    def copy(self) -> "Grid1D":
        return Grid1D(self.x_min, self.x_max, self.cells.copy())

    def totals(self) -> np.ndarray:
        """Domain integrals of mass, momentum (3), translational and internal energy."""
        return conserved_moments(self.cells).sum(axis=0) * self.dx


@dataclass
class Snapshot:
    t: float
    step: int
    grid: Grid1D


@dataclass
class RunResult:
    snapshots: list[Snapshot]
    final: Snapshot
    steady: bool
    initial_totals: np.ndarray
    boundary_inflow: np.ndarray     # time-integrated net inflow of the conserved moments
    steps: int

    def conservation_drift(self) -> np.ndarray:
        """Relative drift of (mass, momentum_1, total energy) after boundary bookkeeping."""
        now = self.final.grid.totals()
        budget = now - self.initial_totals - self.boundary_inflow
        mass0 = self.initial_totals[0]
        energy0 = self.initial_totals[4] + self.initial_totals[5]
        scale_mom = max(abs(self.initial_totals[1]), mass0 * np.sqrt(energy0 / mass0))
        return np.array([abs(budget[0]) / mass0, abs(budget[1]) / scale_mom,
                         abs(budget[4] + budget[5]) / energy0])


# --------------------------------------------------------------------------- initial data

def _uniform_grid(config: SimulationConfig, rho, u1, T) -> Grid1D:
    g = config.grid
    rho, u1, T = (np.asarray(a, dtype=float) for a in (rho, u1, T))
    u = np.zeros(rho.shape + (3,))
    u[:, 0] = u1
    cells = MomentCoefficients.equilibrium(rho, u, T, config.M0, R=config.gas.R,
                                           delta=config.gas.delta)
    return Grid1D(g.x_min, g.x_max, cells)


def _centers(config: SimulationConfig) -> np.ndarray:
    g = config.grid
    return g.x_min + (np.arange(g.n_cells) + 0.5) * g.dx


def init_shock_tube(config: SimulationConfig) -> Grid1D:
    ic = config.initial
    if not isinstance(ic, ShockTube):
        raise ValueError("config does not describe a shock tube")
    left = _centers(config) < 0
    rho = np.where(left, ic.rho_l, ic.rho_r)
    T = np.where(left, ic.T_l, ic.T_r)
    return _uniform_grid(config, rho, np.zeros_like(rho), T)


def init_shock_structure(config: SimulationConfig) -> Grid1D:
    ic = config.initial
    if not isinstance(ic, ShockStructure):
        raise ValueError("config does not describe a shock structure")
    (rl, ul, Tl), (rr, ur, Tr) = ic.states()
    left = _centers(config) < 0
    return _uniform_grid(config, np.where(left, rl, rr), np.where(left, ul, ur),
                         np.where(left, Tl, Tr))


def far_field_states(config: SimulationConfig):
    """((rho, u1, T) left, (rho, u1, T) right) of the initial condition."""
    ic = config.initial
    if isinstance(ic, ShockStructure):
        return ic.states()
    return (ic.rho_l, 0.0, ic.T_l), (ic.rho_r, 0.0, ic.T_r)


def _ghosts(cells: MomentCoefficients, config: SimulationConfig):
    if config.boundary == "zero_gradient":
        return cells[:1], cells[-1:]
    out = []
    for rho, u1, T in far_field_states(config):
        u = np.zeros((1, 3))
        u[0, 0] = u1
        out.append(MomentCoefficients.equilibrium(np.array([rho], float), u, np.array([T], float), cells.M0,
                                                  R=config.gas.R, delta=config.gas.delta))
    return tuple(out)


def initialize(config: SimulationConfig) -> Grid1D:
    if isinstance(config.initial, ShockStructure):
        return init_shock_structure(config)
    return init_shock_tube(config)


# --------------------------------------------------------------------------- helpers

def _frame_values(coeffs: MomentCoefficients):
    fr = coeffs.frame
    rho = coeffs.f0[..., 0]
    T_eq = equilibrium_temperature(fr.T_tr, fr.T_int, fr.delta)
    return rho, T_eq


def relaxation_time(cells: MomentCoefficients, config: SimulationConfig) -> np.ndarray:
    """epsilon = mu / (Pr p) for cells in normal representation."""
    rho, T_eq = _frame_values(cells)
    p = rho * cells.frame.R * T_eq
    return config.gas.mu(T_eq) / (config.gas.Pr * p)


def collision_parameters(cells: MomentCoefficients, config: SimulationConfig) -> CollisionParameters:
    fr = cells.frame
    Z = config.gas.collision_number(fr.T_tr, fr.T_int)
    return CollisionParameters(config.gas.Pr, Z, relaxation_time(cells, config))


def compute_dt(grid: Grid1D, config: SimulationConfig) -> float:
    cells = grid.cells
    fr = cells.frame
    C = hermite_max_root(config.M0)
    RT = fr.R * fr.T_tr
    eps = relaxation_time(cells, config)
    dx = grid.dx
    rate = ((np.abs(fr.u[:, 0]) + C * np.sqrt(RT)) / dx
            + 2.0 * (config.M0 + 1) / dx ** 2 * eps * RT)
    top = float(np.max(rate))
    if not np.isfinite(top) or top <= 0:
        raise InvalidStateError("non-finite state while computing the time step")
    dt = 0.5 * config.cfl / top
    assert dt * top <= 0.5 * config.cfl * (1 + 1e-14)
    return dt


def _minmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.where(a * b > 0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def _mean_frame(a: ExpansionFrame, b: ExpansionFrame) -> ExpansionFrame:
    return ExpansionFrame(0.5 * (a.u + b.u), 0.5 * (a.T_tr + b.T_tr), 0.5 * (a.T_int + b.T_int),
                          a.R, a.delta)


def _speed_bounds(coeffs: MomentCoefficients, C: float):
    """u1 -/+ C sqrt(R T_tr) of each state; falls back to the frame where a face is unphysical."""
    fr = coeffs.frame
    w = conserved_moments(coeffs)
    rho = w[:, 0]
    ok = rho > 0
    safe = np.where(ok, rho, 1.0)
    u = w[:, 1:4] / safe[:, None]
    e_tr = w[:, 4] - 0.5 * safe * np.sum(u ** 2, axis=-1)
    T = e_tr / (1.5 * fr.R * safe)
    ok &= T > 0
    u1 = np.where(ok, u[:, 0], fr.u[:, 0])
    c = C * np.sqrt(fr.R * np.where(ok, T, fr.T_tr))
    return u1 - c, u1 + c


def _hll_flux(fL: MomentCoefficients, fR: MomentCoefficients, lam_m, lam_p, M0: int):
    """Three-branch HLL flux; fL and fR share a frame and carry the closure degree."""
    xL = multiply_by_xi(fL, 0, truncate_to=M0)
    xR = multiply_by_xi(fR, 0, truncate_to=M0)
    dL, dR = fL.truncated(M0), fR.truncated(M0)
    out = []
    for a, b, ua, ub in ((xL.f0, xR.f0, dL.f0, dR.f0), (xL.f1, xR.f1, dL.f1, dR.f1)):
        lm, lp = lam_m[:, None], lam_p[:, None]
        mid = (lp * a - lm * b + lp * lm * (ub - ua)) / (lp - lm)
        out.append(np.where(lm >= 0, a, np.where(lp <= 0, b, mid)))
    return MomentCoefficients(fL.frame, out[0], out[1], M0, M0 - 2)


def _project_conservative(coeffs: MomentCoefficients, target: ExpansionFrame, substeps: int,
                          method: str):
    """Projection whose conserved integrals equal those in the source frame to round-off."""
    w = conserved_moments(coeffs)
    out = project(coeffs, target, substeps, method)
    impose_conserved_moments(out, w)
    return out


def _check_cells(cells: MomentCoefficients, t_label: str = "") -> None:
    w = conserved_moments(cells)
    rho = w[:, 0]
    bad = ~(rho > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = w[:, 1:4] / rho[:, None]
        T_tr = (w[:, 4] - 0.5 * rho * np.sum(u ** 2, axis=-1)) / (1.5 * cells.frame.R * rho)
        T_int = w[:, 5] / (0.5 * cells.frame.delta * cells.frame.R * rho)
    bad |= ~(T_tr > 0) | ~(T_int > 0) | ~np.all(np.isfinite(cells.f0), axis=-1)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise InvalidStateError(
            f"invalid state {t_label}in cell {i} ({int(bad.sum())} bad cells): "
            f"rho={rho[i]:.6g}, T_tr={T_tr[i]:.6g}, T_int={T_int[i]:.6g}")


# --------------------------------------------------------------------------- transport

def transport(grid: Grid1D, dt: float, config: SimulationConfig):
    """HLL update of the convection part.

    Returns the new cells (normal representation) and the time-integrated net
    inflow of the conserved moments through the two domain boundaries.
    """
    cells = grid.cells
    N, M0, dx = grid.n_cells, cells.M0, grid.dx
    ns, how = config.projection_substeps, config.projection_method
    C = hermite_max_root(M0)

    # one ghost per side (copied or held at the far field), neighbours seen from each cell's frame
    ghost_l, ghost_r = _ghosts(cells, config)
    ext = MomentCoefficients.concatenate([ghost_l, cells, ghost_r])
    nbrs = MomentCoefficients.concatenate([ext[0:N], ext[2:N + 2]])
    twice = ExpansionFrame.concatenate([cells.frame, cells.frame])
    seen = project(nbrs, twice, ns, how)
    left, right = seen[:N], seen[N:]

    s0 = _minmod(cells.f0 - left.f0, right.f0 - cells.f0)
    s1 = _minmod(cells.f1 - left.f1, right.f1 - cells.f1)
    z0, z1 = np.zeros((1, s0.shape[1])), np.zeros((1, s1.shape[1]))
    s0, s1 = np.concatenate([z0, s0, z0]), np.concatenate([z1, s1, z1])    # flat ghosts
    plus = ext.with_data(ext.f0 + 0.5 * s0, ext.f1 + 0.5 * s1)
    minus = ext.with_data(ext.f0 - 0.5 * s0, ext.f1 - 0.5 * s1)

    # interface j sits between ext[j] and ext[j + 1]; everything meets in the mean frame
    common = _mean_frame(ext.frame[0:N + 1], ext.frame[1:N + 2])
    batch = MomentCoefficients.concatenate([plus[0:N + 1], minus[1:N + 2], ext[0:N + 1], ext[1:N + 2]])
    seen = project(batch, ExpansionFrame.concatenate([common] * 4), ns, how)
    K = N + 1
    fL, fR, cL, cR = seen[0:K], seen[K:2 * K], seen[2 * K:3 * K], seen[3 * K:4 * K]

    rho, T_eq = _frame_values(ext)
    mu = config.gas.mu(T_eq)
    p = rho * ext.frame.R * T_eq
    mu_i, p_i = 0.5 * (mu[:-1] + mu[1:]), 0.5 * (p[:-1] + p[1:])
    top0, top1 = closure_coefficients(ClosureInput(fL, cL, cR, 0.5 * dx, mu_i, config.gas.Pr, p_i))
    left_states, right_states = augment(fL, top0, top1), augment(fR, top0, top1)

    lmL, lpL = _speed_bounds(left_states, C)
    lmR, lpR = _speed_bounds(right_states, C)
    lam_m, lam_p = np.minimum(lmL, lmR), np.maximum(lpL, lpR)
    flux = _hll_flux(left_states, right_states, lam_m, lam_p, M0)

    w_flux = conserved_moments(flux)
    inflow = dt * (w_flux[0] - w_flux[N])

    back = _project_conservative(MomentCoefficients.concatenate([flux[0:N], flux[1:N + 1]]),
                                 twice, ns, how)
    Fl, Fr = back[:N], back[N:]
    r = dt / dx
    updated = cells.with_data(cells.f0 - r * (Fr.f0 - Fl.f0), cells.f1 - r * (Fr.f1 - Fl.f1))
    _check_cells(updated, "after transport ")
    return _normalize_conservative(updated, ns, how), inflow


def _normalize_conservative(cells: MomentCoefficients, substeps: int, method: str) -> MomentCoefficients:
    w = conserved_moments(cells)
    rho = w[:, 0]
    u = w[:, 1:4] / rho[:, None]
    fr = cells.frame
    T_tr = (w[:, 4] - 0.5 * rho * np.sum(u ** 2, axis=-1)) / (1.5 * fr.R * rho)
    T_int = w[:, 5] / (0.5 * fr.delta * fr.R * rho)
    out = project(cells, ExpansionFrame(u, T_tr, T_int, fr.R, fr.delta), substeps, method)
    out.f0[:, 0] = rho
    enforce_normal(out)
    return out


def hll_step(grid: Grid1D, dt: float, config: SimulationConfig) -> Grid1D:
    cells, _ = transport(grid, dt, config)
    return Grid1D(grid.x_min, grid.x_max, cells)


def collide(grid: Grid1D, dt: float, config: SimulationConfig) -> Grid1D:
    cells = collision_step(grid.cells, collision_parameters(grid.cells, config), dt)
    _check_cells(cells, "after collision ")
    return Grid1D(grid.x_min, grid.x_max, cells)


# --------------------------------------------------------------------------- time loop

@dataclass
class StepInfo:
    t: float
    step: int
    dt: float
    residual: float      # ||rho^{n+1} - rho^n||_1 / dt


def run(config: SimulationConfig, grid: Optional[Grid1D] = None,
        on_step: Optional[Callable[[StepInfo], None]] = None) -> RunResult:
    """Advance to ``config.t_end`` or, when it is None, to a steady state."""
    if grid is None:
        grid = initialize(config)
    t, step = 0.0, 0
    totals0 = grid.totals()
    inflow = np.zeros(6)
    snaps = [Snapshot(0.0, 0, grid.copy())]
    every = config.output.snapshot_every
    next_snap = every if every else np.inf
    calm, steady = 0, False
    while step < config.max_steps:
        if config.t_end is not None and t >= config.t_end * (1 - 1e-14):
            break
        dt = compute_dt(grid, config)
        if config.t_end is not None:
            dt = min(dt, config.t_end - t)
        cells, flow = transport(grid, dt, config)
        new = collide(Grid1D(grid.x_min, grid.x_max, cells), dt, config)
        inflow += flow
        residual = float(np.sum(np.abs(new.cells.f0[:, 0] - grid.cells.f0[:, 0])) * grid.dx / dt)
        grid, t, step = new, t + dt, step + 1
        if on_step is not None:
            on_step(StepInfo(t, step, dt, residual))
        if t >= next_snap - 1e-14 and (config.t_end is None or t < config.t_end * (1 - 1e-14)):
            snaps.append(Snapshot(t, step, grid.copy()))
            next_snap += every
        if config.t_end is None:
            calm = calm + 1 if residual < config.steady_tol else 0
            if calm >= config.steady_window:
                steady = True
                break
    if config.t_end is None and not steady:
        log.warning("no steady state after %d steps (t=%.4g)", step, t)
    final = Snapshot(t, step, grid)
    snaps.append(final)
    return RunResult(snaps, final, steady, totals0, inflow, step)
