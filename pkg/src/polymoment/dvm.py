"""Reduced discrete-velocity reference solver for the 1D ES-BGK equation.

Reduced distributions
---------------------
With flow only along x the distribution is integrated over the transverse
velocities and the internal energy:

    g(v)  = int f dxi_2 dxi_3 dI
    h1(v) = int (xi_2^2 + xi_3^2) / 2 f dxi_2 dxi_3 dI
    h2(v) = int I^(2/delta) f dxi_2 dxi_3 dI

where v = xi_1.  Multiplying the kinetic equation by 1, (xi_2^2 + xi_3^2)/2
and I^(2/delta) and integrating leaves three 1D equations of the same form,

    d_t phi + v d_x phi = (G_phi - phi) / eps,      phi in {g, h1, h2}.

Reduced targets
---------------
For u_2 = u_3 = 0 the covariance of the ES-BGK Gaussian has no coupling
between xi_1 and (xi_2, xi_3) and T22 = T33.  Integrating the Gaussian over
the transverse velocities and over I then gives

    G_g(v)  = rho / sqrt(2 pi T11) exp(-(v - u_1)^2 / (2 T11))
    G_h1(v) = T22 G_g(v)
    G_h2(v) = (delta / 2) R T_rel G_g(v)

with T_rel = T_eq / Z + (1 - 1/Z) T_int.  The macroscopic state follows from

    rho = sum g dv,  rho u_1 = sum v g dv,  Theta_11 = sum (v - u_1)^2 g dv,
    Theta_22 = Theta_33 = sum h1 dv,
    (3/2) rho R T_tr = sum [(v - u_1)^2 / 2 g + h1] dv,
    (delta/2) rho R T_int = sum h2 dv.

Relaxation
----------
During a collision substep rho, u_1 and T_eq are fixed, T_tr and T_int relax
to T_eq with rate 1/(eps Z) and Theta_11 - rho R T_tr decays with rate
1/(eps Pr).  The target G(s) is therefore known along the substep and the
update

    phi(dt) = e^{-dt/eps} phi(0) + int_0^dt e^{-(dt-s)/eps} G(s) ds / eps

is evaluated with Gauss-Legendre nodes in s, weights rescaled so that they
sum to 1 - e^{-dt/eps} exactly.  Each discrete target is multiplied by a
quadratic in (v - u_1) so that its lattice moments (mass, momentum, Theta_11)
equal the continuous ones; mass, momentum and total energy are then conserved
to round-off.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .config import ShockStructure, ShockTube, SimulationConfig
from .esbgk import relaxation_temperature
from .moments import InvalidStateError, MacroscopicState, equilibrium_temperature

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(4)


@dataclass
class ReducedDistribution:
    """g, h1, h2 on a uniform xi_1 lattice; arrays have shape (..., n_v)."""

    v: np.ndarray
    g: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    R: float = 1.0
    delta: float = 2.0

    def __post_init__(self):
        self.v = np.asarray(self.v, dtype=float)
        if self.v.ndim != 1 or len(self.v) < 8:
            raise ValueError("velocity lattice must be 1D with at least 8 nodes")
        if not np.allclose(np.diff(self.v), self.dv, rtol=1e-10):
            raise ValueError("velocity lattice must be uniform")
        for name in ("g", "h1", "h2"):
            a = np.asarray(getattr(self, name), dtype=float)
            if a.shape[-1] != len(self.v):
                raise ValueError(f"{name} does not match the lattice")
            setattr(self, name, a)

    @property
    def dv(self) -> float:
        return float(self.v[1] - self.v[0])

    @property
    def n_v(self) -> int:
        return len(self.v)

    def copy(self) -> "ReducedDistribution":
        return ReducedDistribution(self.v, self.g.copy(), self.h1.copy(), self.h2.copy(),
                                   self.R, self.delta)

    def totals(self) -> np.ndarray:
        """Lattice sums of mass, x-momentum and total energy (per unit length, summed over cells)."""
        dv = self.dv
        mass = self.g.sum() * dv
        mom = (self.v * self.g).sum() * dv
        energy = (0.5 * self.v ** 2 * self.g + self.h1 + self.h2).sum() * dv
        return np.array([mass, mom, energy])


def velocity_lattice(u_ref: float, T_ref: float, n_v: int = 400, width: float = 8.0,
                     R: float = 1.0, spread: float = 0.0) -> np.ndarray:
    half = width * math.sqrt(R * T_ref) + spread
    return np.linspace(u_ref - half, u_ref + half, n_v)


def reduced_equilibrium(v, rho, u1, T_tr, T_int, R: float = 1.0, delta: float = 2.0,
                        T11=None, T22=None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Pointwise reduced Gaussian; T11, T22 default to R T_tr (isotropic Maxwellian)."""
    rho, u1, T_tr, T_int = (np.asarray(a, dtype=float)[..., None] for a in (rho, u1, T_tr, T_int))
    T11 = R * T_tr if T11 is None else np.asarray(T11, dtype=float)[..., None]
    T22 = R * T_tr if T22 is None else np.asarray(T22, dtype=float)[..., None]
    g = rho / np.sqrt(2 * math.pi * T11) * np.exp(-(v - u1) ** 2 / (2 * T11))
    return g, T22 * g, 0.5 * delta * R * T_int * g


def reduce_macroscopic(rd: ReducedDistribution) -> MacroscopicState:
    R, delta, dv, v = rd.R, rd.delta, rd.dv, rd.v
    rho = rd.g.sum(axis=-1) * dv
    if np.any(~(rho > 0)):
        raise InvalidStateError("non-positive density in reduced distribution")
    u1 = (v * rd.g).sum(axis=-1) * dv / rho
    c = v - u1[..., None]
    th11 = (c ** 2 * rd.g).sum(axis=-1) * dv
    th22 = rd.h1.sum(axis=-1) * dv
    T_tr = (0.5 * th11 + th22) / (1.5 * rho * R)
    T_int = rd.h2.sum(axis=-1) * dv / (0.5 * delta * rho * R)
    if np.any(~(T_tr > 0)) or np.any(~(T_int > 0)):
        raise InvalidStateError("non-positive temperature in reduced distribution")
    T_eq = equilibrium_temperature(T_tr, T_int, delta)
    u = np.zeros(rho.shape + (3,))
    u[..., 0] = u1
    Theta = np.zeros(rho.shape + (3, 3))
    Theta[..., 0, 0] = th11
    Theta[..., 1, 1] = th22
    Theta[..., 2, 2] = th22
    Q = np.zeros(rho.shape + (3,))
    Q[..., 0] = (c * (0.5 * c ** 2 * rd.g + rd.h1)).sum(axis=-1) * dv
    q1 = Q[..., 0] + (c * rd.h2).sum(axis=-1) * dv
    return MacroscopicState(rho=rho, u=u, T_tr=T_tr, T_int=T_int, T_eq=T_eq, p=rho * R * T_eq,
                            Theta=Theta, Q=Q, q1=q1, R=R, delta=delta)


# --------------------------------------------------------------------------- collision

def _corrected_gaussian(v, rho, u1, T11):
    """Lattice Gaussian rescaled by a quadratic so that sum (1, c, c^2) G dv = (rho, 0, rho T11)."""
    dv = v[1] - v[0]
    c = v - u1[..., None]
    G = rho[..., None] / np.sqrt(2 * math.pi * T11[..., None]) * np.exp(-c ** 2 / (2 * T11[..., None]))
    phi = np.stack([np.ones_like(c), c, c ** 2], axis=-2)                # (..., 3, n_v)
    A = np.einsum("...in,...jn,...n->...ij", phi, phi, G) * dv
    target = np.stack([rho, np.zeros_like(rho), rho * T11], axis=-1)
    coef = np.linalg.solve(A, target[..., None])[..., 0]
    return G * np.einsum("...i,...in->...n", coef, phi)


def collide_reduced(rd: ReducedDistribution, dt: float, Pr: float, Z, eps) -> ReducedDistribution:
    """Exponential product-integration of the reduced relaxation over ``dt``."""
    R, delta, v = rd.R, rd.delta, rd.v
    m = reduce_macroscopic(rd)
    Z = np.broadcast_to(np.asarray(Z, dtype=float), m.rho.shape)
    eps = np.broadcast_to(np.asarray(eps, dtype=float), m.rho.shape)
    u1 = m.u[..., 0]
    D11 = m.Theta[..., 0, 0] - m.rho * R * m.T_tr
    D22 = m.Theta[..., 1, 1] - m.rho * R * m.T_tr
    decay = np.exp(-dt / eps)
    s_nodes = 0.5 * dt * (_GL_NODES + 1.0)
    w = 0.5 * dt * _GL_WEIGHTS[:, None] * np.exp(-(dt - s_nodes[:, None]) / eps) / eps
    w *= (1.0 - decay) / w.sum(axis=0)
    g = decay[..., None] * rd.g
    h1 = decay[..., None] * rd.h1
    h2 = decay[..., None] * rd.h2
    for s, wq in zip(s_nodes, w):
        zdecay = np.exp(-s / (eps * Z))
        T_tr = m.T_eq + (m.T_tr - m.T_eq) * zdecay
        T_int = m.T_eq + (m.T_int - m.T_eq) * zdecay
        pdecay = np.exp(-s / (eps * Pr))
        iso = (1 / Pr - 1 / Z) * R * T_tr + R * m.T_eq / Z
        T11 = iso + (1 - 1 / Pr) * (R * T_tr + D11 * pdecay / m.rho)
        T22 = iso + (1 - 1 / Pr) * (R * T_tr + D22 * pdecay / m.rho)
        if np.any(T11 <= 0) or np.any(T22 <= 0):
            raise InvalidStateError("reduced ES-BGK covariance is not positive")
        T_rel = relaxation_temperature(m.T_eq, T_int, Z)
        Gg = _corrected_gaussian(v, m.rho, u1, T11)
        g = g + wq[..., None] * Gg
        h1 = h1 + (wq * T22)[..., None] * Gg
        h2 = h2 + (wq * 0.5 * delta * R * T_rel)[..., None] * Gg
    return ReducedDistribution(v, g, h1, h2, R, delta)


# --------------------------------------------------------------------------- transport

def _minmod(a, b):
    return np.where(a * b > 0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def _upwind(phi: np.ndarray, v: np.ndarray, dt: float, dx: float, second_order: bool,
            ghosts: Optional[np.ndarray] = None) -> np.ndarray:
    """Upwind finite-volume update along x with two ghosts per side.

    The ghosts copy the edge cells unless ``ghosts`` (shape (2, n_v)) fixes them.
    """
    n = phi.shape[0]
    lo, hi = (phi[:1], phi[-1:]) if ghosts is None else (ghosts[:1], ghosts[1:])
    ext = np.concatenate([lo, lo, phi, hi, hi])
    fL, fR = ext[1:n + 2], ext[2:n + 3]                 # the n + 1 faces of the real cells
    if second_order:
        s = _minmod(ext[1:n + 3] - ext[0:n + 2], ext[2:n + 4] - ext[1:n + 3])
        fL = fL + 0.5 * s[0:n + 1]
        fR = fR - 0.5 * s[1:n + 2]
    flux = np.maximum(v, 0.0) * fL + np.minimum(v, 0.0) * fR
    return phi - dt / dx * (flux[1:] - flux[:-1])


def dvm_step(rd: ReducedDistribution, dt: float, dx: float, gas, second_order: bool = False,
             far_field: Optional[ReducedDistribution] = None) -> ReducedDistribution:
    """One split step: upwind transport of g, h1, h2, then exponential relaxation.

    ``far_field`` (two cells, left then right) holds the ghost states fixed.
    """
    limit = 0.5 * dx if second_order else dx
    if dt * np.max(np.abs(rd.v)) > limit * (1 + 1e-12):
        raise ValueError("dt violates the transport CFL bound")
    edge = (None,) * 3 if far_field is None else (far_field.g, far_field.h1, far_field.h2)
    moved = ReducedDistribution(rd.v, *(_upwind(a, rd.v, dt, dx, second_order, e)
                                        for a, e in zip((rd.g, rd.h1, rd.h2), edge)), rd.R, rd.delta)
    if np.any(moved.g < 0) or np.any(moved.h1 < 0) or np.any(moved.h2 < 0):
        raise InvalidStateError("reduced distribution lost positivity in transport")
    m = reduce_macroscopic(moved)
    eps = gas.mu(m.T_eq) / (gas.Pr * m.p)
    Z = gas.collision_number(m.T_tr, m.T_int)
    return collide_reduced(moved, dt, gas.Pr, Z, eps)


# --------------------------------------------------------------------------- driver

@dataclass
class DVMGrid:
    x_min: float
    x_max: float
    state: ReducedDistribution

    @property
    def n_cells(self) -> int:
        return self.state.g.shape[0]

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx


@dataclass
class DVMSnapshot:
    t: float
    step: int
    grid: DVMGrid


@dataclass
class DVMRunResult:
    snapshots: list[DVMSnapshot]
    final: DVMSnapshot
    steps: int


def init_dvm(config: SimulationConfig) -> DVMGrid:
    gas, spec, opts = config.gas, config.grid, config.dvm
    x = spec.x_min + (np.arange(spec.n_cells) + 0.5) * spec.dx
    left = x < 0
    ic = config.initial
    if isinstance(ic, ShockTube):
        states = ((ic.rho_l, 0.0, ic.T_l), (ic.rho_r, 0.0, ic.T_r))
    elif isinstance(ic, ShockStructure):
        states = ic.states()
    else:
        raise ValueError("unsupported initial condition")
    (rl, ul, Tl), (rr, ur, Tr) = states
    v = velocity_lattice(0.5 * (ul + ur), max(Tl, Tr), opts.n_v, opts.width, gas.R,
                         spread=0.5 * abs(ul - ur))
    rho = np.where(left, rl, rr)
    u1 = np.where(left, ul, ur)
    T = np.where(left, Tl, Tr)
    g, h1, h2 = reduced_equilibrium(v, rho, u1, T, T, gas.R, gas.delta)
    return DVMGrid(spec.x_min, spec.x_max, ReducedDistribution(v, g, h1, h2, gas.R, gas.delta))


def dvm_dt(grid: DVMGrid, cfl: float, second_order: bool = False) -> float:
    """Courant-limited step; the limited linear reconstruction needs half of it for positivity."""
    dt = cfl * grid.dx / float(np.max(np.abs(grid.state.v)))
    return 0.5 * dt if second_order else dt


def run_dvm(config: SimulationConfig, grid: Optional[DVMGrid] = None,
            on_step: Optional[Callable[[float, int], None]] = None) -> DVMRunResult:
    if config.t_end is None:
        raise ValueError("the reference solver needs a finite t_end")
    grid = init_dvm(config) if grid is None else grid
    far = None
    if config.boundary == "fixed":
        s0 = grid.state        # the initial edge cells are the far-field equilibria
        far = ReducedDistribution(s0.v, s0.g[[0, -1]], s0.h1[[0, -1]], s0.h2[[0, -1]], s0.R, s0.delta)
    t, step = 0.0, 0
    snaps = [DVMSnapshot(0.0, 0, DVMGrid(grid.x_min, grid.x_max, grid.state.copy()))]
    every = config.output.snapshot_every
    next_snap = every if every else np.inf
    while t < config.t_end * (1 - 1e-14) and step < config.max_steps:
        dt = min(dvm_dt(grid, config.cfl, config.dvm.second_order), config.t_end - t)
        grid = DVMGrid(grid.x_min, grid.x_max,
                       dvm_step(grid.state, dt, grid.dx, config.gas, config.dvm.second_order, far))
        t, step = t + dt, step + 1
        if on_step is not None:
            on_step(t, step)
        if t >= next_snap - 1e-14 and t < config.t_end * (1 - 1e-14):
            snaps.append(DVMSnapshot(t, step, DVMGrid(grid.x_min, grid.x_max, grid.state.copy())))
            next_snap += every
    final = DVMSnapshot(t, step, grid)
    snaps.append(final)
    return DVMRunResult(snaps, final, step)
