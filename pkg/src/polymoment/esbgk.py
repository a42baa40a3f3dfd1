"""ES-BGK relaxation: Gaussian target coefficients and the split collision step."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np

from .moments import (ExpansionFrame, InvalidStateError, MacroscopicState, MomentCoefficients,
                      axis_shift_tables, equilibrium_temperature, moment_layout, padded,
                      stress_tensor)


@dataclass
class CollisionParameters:
    """Pr, Z and the relaxation time epsilon = mu / (Pr p); Z and epsilon may be per cell."""

    Pr: float
    Z: np.ndarray
    epsilon: np.ndarray

    def __post_init__(self):
        self.Z = np.asarray(self.Z, dtype=float)
        self.epsilon = np.asarray(self.epsilon, dtype=float)
        if self.Pr <= 0:
            raise ValueError("Pr must be positive")
        if np.any(self.Z < 1):
            raise ValueError("relaxation collision number Z must be >= 1")
        if np.any(~(self.epsilon > 0)):
            raise ValueError("epsilon must be positive")

    @property
    def nu(self) -> np.ndarray:
        """(1 - 1/Pr) / (1 - 1/Z); NaN in the Z = 1 limit where it is undefined."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.Z == 1, np.nan, (1 - 1 / self.Pr) / (1 - 1 / self.Z))


def relaxation_temperature(T_eq, T_int, Z):
    return T_eq / Z + (1 - 1 / Z) * T_int


def relaxation_tensor(rho, Theta, T_tr, T_eq, Pr, Z, R: float = 1.0) -> np.ndarray:
    """The covariance of the ES-BGK Gaussian.

    Written as (1/Pr - 1/Z) R T_tr Id + (1 - 1/Pr) Theta / rho + R T_eq / Z Id,
    which equals the usual nu-form and stays finite at Z = 1.
    """
    rho, T_tr, T_eq, Z = (np.asarray(a, dtype=float) for a in (rho, T_tr, T_eq, Z))
    eye = np.eye(3)
    iso = ((1 / Pr - 1 / Z) * R * T_tr + R * T_eq / Z)[..., None, None]
    return iso * eye + (1 - 1 / Pr) * Theta / rho[..., None, None]


def check_positive_definite(T: np.ndarray) -> None:
    if np.any(np.linalg.eigvalsh(T)[..., 0] <= 0):
        raise InvalidStateError("ES-BGK covariance is not positive definite "
                                "(flow too anisotropic for the model)")


@lru_cache(maxsize=None)
def _recursion_tables(M: int, pivot: str):
    """Per alpha: the pivot axis i and the indices of alpha - e_i - e_j, j = 1..3."""
    L = moment_layout(M)
    piv = np.zeros(L.size, dtype=np.int64)
    lower = np.full((L.size, 3), L.size, dtype=np.int64)
    for n, a in enumerate(L.alphas):
        if a.sum() < 2:
            continue
        nz = np.nonzero(a)[0]
        i = int(nz[0] if pivot == "first" else nz[-1])
        piv[n] = i
        for j in range(3):
            b = a.copy()
            b[i] -= 1
            b[j] -= 1
            if b.min() >= 0:
                lower[n, j] = L.index[tuple(int(c) for c in b)]
    return piv, lower


def gaussian_expansion(rho, Theta, T_tr, T_int, T_eq, Pr, Z, M0: int, R: float = 1.0,
                       delta: float = 2.0, pivot: Literal["first", "last"] = "first"):
    """G_{alpha,0} (|alpha| <= M0) and G_{alpha,1} (|alpha| <= M0 - 2) in the frame (u, T_tr, T_int)."""
    rho = np.asarray(rho, dtype=float)
    T = relaxation_tensor(rho, Theta, T_tr, T_eq, Pr, Z, R)
    check_positive_definite(T)
    B = T - (R * np.asarray(T_tr))[..., None, None] * np.eye(3)
    L = moment_layout(M0)
    piv, lower = _recursion_tables(M0, pivot)
    G = np.zeros(rho.shape + (L.size + 1,))
    G[..., 0] = rho
    alpha_piv = L.alphas[np.arange(L.size), piv]
    for deg in range(2, M0 + 1, 2):
        sl = L.degree_slice(deg)
        rows = B[..., piv[sl], :]                          # (..., n_deg, 3)
        G[..., sl] = np.sum(rows * G[..., lower[sl]], axis=-1) / alpha_piv[sl]
    G0 = G[..., :L.size]
    C = 0.5 * delta / np.asarray(Z) * R * (np.asarray(T_int) - np.asarray(T_eq))
    n1 = moment_layout(M0 - 2).size
    G1 = np.asarray(C)[..., None] * G0[..., :n1]
    return G0, G1


def gaussian_coefficients(coeffs: MomentCoefficients, Pr: float, Z, M0: int | None = None,
                          pivot: Literal["first", "last"] = "first") -> MomentCoefficients:
    """Expansion of the ES-BGK Gaussian of a normal-representation state, in its frame."""
    fr = coeffs.frame
    M0 = coeffs.M0 if M0 is None else M0
    rho = coeffs.f0[..., 0]
    Theta = stress_tensor(coeffs)
    T_eq = equilibrium_temperature(fr.T_tr, fr.T_int, fr.delta)
    G0, G1 = gaussian_expansion(rho, Theta, fr.T_tr, fr.T_int, T_eq, Pr, Z, M0, fr.R, fr.delta, pivot)
    return MomentCoefficients(fr, G0, G1, M0)


def _second_order_indices(L):
    return [(i, j, L.index[tuple(int(i == d) + int(j == d) for d in range(3))])
            for i in range(3) for j in range(i, 3)]


def collision_step(coeffs: MomentCoefficients, params: CollisionParameters, dt: float) -> MomentCoefficients:
    """Advance the space-homogeneous relaxation by ``dt``.

    rho, u, T_eq stay fixed; T_tr, T_int and the second-order coefficients
    follow their exact exponentials; the remaining coefficients use the
    Crank-Nicolson rule, solved explicitly degree by degree (k = 0 first, then
    k = 1).  The input must be in normal representation; the output is in
    normal representation relative to the relaxed temperatures.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    fr = coeffs.frame
    R, delta, m = fr.R, fr.delta, fr.m
    Pr, Z, eps = params.Pr, np.broadcast_to(params.Z, fr.batch_shape), np.broadcast_to(params.epsilon, fr.batch_shape)
    rho = coeffs.f0[..., 0]
    T_eq = equilibrium_temperature(fr.T_tr, fr.T_int, delta)

    def temps(t):
        decay = np.exp(-t / (eps * Z))
        return T_eq + (fr.T_tr - T_eq) * decay, T_eq + (fr.T_int - T_eq) * decay

    L0, L1 = coeffs.layout0, coeffs.layout1
    second = _second_order_indices(L0)

    def second_order(t):
        return np.exp(-t / (eps * Pr))[..., None] * coeffs.f0[..., [n for _, _, n in second]]

    T_tr_h, T_int_h = temps(0.5 * dt)
    T_tr_1, T_int_1 = temps(dt)

    mid = coeffs.copy()
    mid.f0[..., [n for _, _, n in second]] = second_order(0.5 * dt)
    mid.frame = ExpansionFrame(fr.u, T_tr_h, T_int_h, R, delta)
    G = gaussian_coefficients(mid, Pr, Z)

    a = (R * (T_eq - T_tr_h) / Z)[..., None]     # drives the alpha - 2 e_j coupling
    b = (R * (T_eq - T_int_h) / Z)[..., None]    # drives the k - 1 coupling
    r = (dt / eps)[..., None]

    new0 = np.zeros(coeffs.f0.shape[:-1] + (L0.size + 1,))
    new0[..., 0] = rho
    new0[..., [n for _, _, n in second]] = second_order(dt)
    old0 = padded(coeffs.f0)
    lo2_0 = axis_shift_tables(coeffs.M0, coeffs.M0, -2)
    for deg in range(3, coeffs.M0 + 1):
        sl = L0.degree_slice(deg)
        idx = lo2_0[:, sl]
        couple = 0.5 * (new0[..., idx].sum(axis=-2) + old0[..., idx].sum(axis=-2)) / 2.0
        rhs = old0[..., sl] * (1 - 0.5 * r) + r * (G.f0[..., sl] - a * couple)
        new0[..., sl] = rhs / (1 + 0.5 * r)

    new1 = np.zeros(coeffs.f1.shape[:-1] + (L1.size + 1,))
    old1 = padded(coeffs.f1)
    lo2_1 = axis_shift_tables(coeffs.M1, coeffs.M1, -2)
    for deg in range(1, coeffs.M1 + 1):
        sl = L1.degree_slice(deg)
        idx = lo2_1[:, sl]
        couple2 = 0.5 * (new1[..., idx].sum(axis=-2) + old1[..., idx].sum(axis=-2)) / 2.0
        couple_k = (m + 1) * 0.5 * (new0[..., sl] + old0[..., sl])
        rhs = old1[..., sl] * (1 - 0.5 * r) + r * (G.f1[..., sl] - a * couple2 + b * couple_k)
        new1[..., sl] = rhs / (1 + 0.5 * r)

    frame = ExpansionFrame(fr.u.copy(), T_tr_1, T_int_1, R, delta)
    return MomentCoefficients(frame, new0[..., :-1], new1[..., :-1], coeffs.M0, coeffs.M1)


def collision_rhs(coeffs: MomentCoefficients, params: CollisionParameters) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Time derivatives (df0, df1, dT_tr, dT_int) of the collision-only moment system.

    Used as an independent reference for the time integrator: it evaluates the
    relaxation ODE directly, with nothing integrated analytically.
    """
    fr = coeffs.frame
    R, delta, m = fr.R, fr.delta, fr.m
    Pr, Z, eps = params.Pr, params.Z, params.epsilon
    T_eq = equilibrium_temperature(fr.T_tr, fr.T_int, delta)
    G = gaussian_coefficients(coeffs, Pr, Z)
    a = (R * (T_eq - fr.T_tr) / Z)[..., None]
    b = (R * (T_eq - fr.T_int) / Z)[..., None]
    p0 = padded(coeffs.f0)
    p1 = padded(coeffs.f1)
    lo2_0 = axis_shift_tables(coeffs.M0, coeffs.M0, -2)
    lo2_1 = axis_shift_tables(coeffs.M1, coeffs.M1, -2)
    n1 = coeffs.f1.shape[-1]
    e = eps[..., None] if np.ndim(eps) else eps
    d0 = (G.f0 - coeffs.f0 - a * 0.5 * p0[..., lo2_0].sum(axis=-2)) / e
    d1 = (G.f1 - coeffs.f1 - a * 0.5 * p1[..., lo2_1].sum(axis=-2) + b * (m + 1) * coeffs.f0[..., :n1]) / e
    dT_tr = (T_eq - fr.T_tr) / (eps * Z)
    dT_int = (T_eq - fr.T_int) / (eps * Z)
    return d0, d1, dT_tr, dT_int
