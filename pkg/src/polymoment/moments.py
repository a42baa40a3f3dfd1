"""Moment coefficients f_{alpha,k} (k = 0, 1) attached to a Hermite-Laguerre frame.

All containers are *batched*: a frame or a coefficient set may carry any
leading batch shape (one entry per grid cell, say).  A single state simply has
batch shape ``()``.  Coefficients of each k are stored densely in graded
lexicographic order of the multi-index alpha.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Optional

import numpy as np

from .basis import gamma_coefficient, hermite_table, laguerre_eval, laguerre_order


class InvalidStateError(ValueError):
    """A recovered density or temperature is non-positive (loss of realizability)."""


# --------------------------------------------------------------------------- layout

@dataclass(frozen=True)
class MultiIndex:
    a1: int
    a2: int
    a3: int

    def __post_init__(self):
        if min(self.a1, self.a2, self.a3) < 0:
            raise ValueError("multi-index components must be non-negative")

    @property
    def degree(self) -> int:
        return self.a1 + self.a2 + self.a3

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.a1, self.a2, self.a3)


class MomentLayout:
    """Graded-lexicographic enumeration of all alpha with |alpha| <= M."""

    def __init__(self, M: int):
        if M < 0:
            raise ValueError("M must be non-negative")
        self.M = M
        alphas = []
        for deg in range(M + 1):
            alphas.extend(a for a in product(range(deg + 1), repeat=3) if sum(a) == deg)
        self.alphas = np.array(alphas, dtype=np.int64).reshape(-1, 3)
        self.size = len(alphas)
        self.degree = self.alphas.sum(axis=1)
        self.index = {tuple(int(c) for c in a): i for i, a in enumerate(self.alphas)}
        # degree blocks are contiguous
        self.offsets = np.searchsorted(self.degree, np.arange(M + 2))

    def __len__(self) -> int:
        return self.size

    def __repr__(self) -> str:
        return f"MomentLayout(M={self.M}, size={self.size})"

    def degree_slice(self, deg: int) -> slice:
        return slice(int(self.offsets[deg]), int(self.offsets[deg + 1]))

    def find(self, alpha) -> int:
        """Index of ``alpha`` or -1 when it is outside the layout."""
        return self.index.get(tuple(int(c) for c in alpha), -1)


@lru_cache(maxsize=None)
def moment_layout(M: int) -> MomentLayout:
    return MomentLayout(M)


@lru_cache(maxsize=None)
def shift_table(M_src: int, M_dst: int, offset: tuple[int, int, int]) -> np.ndarray:
    """For every alpha of the ``M_dst`` layout, the ``M_src`` index of alpha + offset.

    Missing entries point at ``len(src)``, i.e. the zero pad column appended by
    :func:`padded`.
    """
    src, dst = moment_layout(M_src), moment_layout(M_dst)
    target = dst.alphas + np.asarray(offset)
    out = np.full(dst.size, src.size, dtype=np.int64)
    for i, beta in enumerate(target):
        if beta.min() >= 0 and beta.sum() <= M_src:
            out[i] = src.index[tuple(int(c) for c in beta)]
    out.setflags(write=False)
    return out


def axis_shift_tables(M_src: int, M_dst: int, step: int) -> np.ndarray:
    """Stacked :func:`shift_table` for offsets ``step * e_d``, d = 1..3; shape (3, n_dst)."""
    return np.stack([shift_table(M_src, M_dst, tuple(step * int(d == j) for j in range(3)))
                     for d in range(3)])


def padded(a: np.ndarray) -> np.ndarray:
    return np.concatenate([a, np.zeros(a.shape[:-1] + (1,))], axis=-1)


def total_moment_count(M0: int) -> int:
    """Number of stored coefficients for M1 = M0 - 2."""
    return moment_layout(M0).size + moment_layout(M0 - 2).size


# --------------------------------------------------------------------------- frames

@dataclass
class ExpansionFrame:
    """Expansion centre u and scalings T_tr, T_int of the basis functions."""

    u: np.ndarray
    T_tr: np.ndarray
    T_int: np.ndarray
    R: float = 1.0
    delta: float = 2.0

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        self.T_tr = np.asarray(self.T_tr, dtype=float)
        self.T_int = np.asarray(self.T_int, dtype=float)
        if self.u.shape[-1:] != (3,):
            raise ValueError("u must have a trailing axis of length 3")
        if self.T_tr.shape != self.u.shape[:-1] or self.T_int.shape != self.T_tr.shape:
            raise ValueError("frame component shapes disagree")
        if not (np.all(self.T_tr > 0) and np.all(self.T_int > 0)):
            raise InvalidStateError("frame temperatures must be positive")
        if self.R <= 0 or self.delta <= 0:
            raise ValueError("R and delta must be positive")

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.T_tr.shape

    @property
    def m(self) -> float:
        return laguerre_order(self.delta)

    def __getitem__(self, idx) -> "ExpansionFrame":
        return ExpansionFrame(self.u[idx], self.T_tr[idx], self.T_int[idx], self.R, self.delta)

    def copy(self) -> "ExpansionFrame":
        return ExpansionFrame(self.u.copy(), self.T_tr.copy(), self.T_int.copy(), self.R, self.delta)

    def same_gas(self, other: "ExpansionFrame") -> bool:
        return self.R == other.R and self.delta == other.delta

    def equals(self, other: "ExpansionFrame") -> bool:
        return (self.same_gas(other) and np.array_equal(self.u, other.u)
                and np.array_equal(self.T_tr, other.T_tr)
                and np.array_equal(self.T_int, other.T_int))

    @staticmethod
    def concatenate(frames: list["ExpansionFrame"]) -> "ExpansionFrame":
        R, delta = frames[0].R, frames[0].delta
        if any(not fr.same_gas(frames[0]) for fr in frames):
            raise ValueError("frames belong to different gases")
        return ExpansionFrame(np.concatenate([np.atleast_2d(f.u) for f in frames]),
                              np.concatenate([np.atleast_1d(f.T_tr) for f in frames]),
                              np.concatenate([np.atleast_1d(f.T_int) for f in frames]),
                              R, delta)


# --------------------------------------------------------------------------- coefficients

@dataclass
class MomentCoefficients:
    frame: ExpansionFrame
    f0: np.ndarray
    f1: np.ndarray
    M0: int
    M1: Optional[int] = None

    def __post_init__(self):
        if self.M1 is None:
            self.M1 = self.M0 - 2
        self.f0 = np.asarray(self.f0, dtype=float)
        self.f1 = np.asarray(self.f1, dtype=float)
        n0, n1 = moment_layout(self.M0).size, moment_layout(self.M1).size
        bs = self.frame.batch_shape
        if self.f0.shape != bs + (n0,) or self.f1.shape != bs + (n1,):
            raise ValueError(f"coefficient arrays {self.f0.shape}, {self.f1.shape} do not "
                             f"match batch {bs} with layouts ({n0}, {n1})")

    # --- construction
    @classmethod
    def zeros(cls, frame: ExpansionFrame, M0: int, M1: Optional[int] = None) -> "MomentCoefficients":
        M1 = M0 - 2 if M1 is None else M1
        bs = frame.batch_shape
        return cls(frame, np.zeros(bs + (moment_layout(M0).size,)),
                   np.zeros(bs + (moment_layout(M1).size,)), M0, M1)

    @classmethod
    def equilibrium(cls, rho, u, T, M0: int, R: float = 1.0, delta: float = 2.0,
                    T_int=None) -> "MomentCoefficients":
        """rho * psi_{0,0} in its own frame: a Maxwellian with T_tr = T_int = T."""
        rho = np.asarray(rho, dtype=float)
        T = np.broadcast_to(np.asarray(T, dtype=float), rho.shape).copy()
        T_int = T if T_int is None else np.broadcast_to(np.asarray(T_int, dtype=float), rho.shape).copy()
        u = np.broadcast_to(np.asarray(u, dtype=float), rho.shape + (3,)).copy()
        out = cls.zeros(ExpansionFrame(u, T, T_int, R, delta), M0)
        out.f0[..., 0] = rho
        return out

    # --- basic access
    @property
    def layout0(self) -> MomentLayout:
        return moment_layout(self.M0)

    @property
    def layout1(self) -> MomentLayout:
        return moment_layout(self.M1)

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.frame.batch_shape

    @property
    def size(self) -> int:
        return self.f0.shape[-1] + self.f1.shape[-1]

    def coefficient(self, alpha, k: int = 0) -> np.ndarray:
        layout = self.layout0 if k == 0 else self.layout1
        i = layout.find(alpha)
        data = self.f0 if k == 0 else self.f1
        if i < 0:
            return np.zeros(self.batch_shape)
        return data[..., i]

    def set_coefficient(self, alpha, k: int, value) -> None:
        layout = self.layout0 if k == 0 else self.layout1
        i = layout.find(alpha)
        if i < 0:
            raise IndexError(f"alpha={alpha}, k={k} outside the truncation")
        (self.f0 if k == 0 else self.f1)[..., i] = value

    def __getitem__(self, idx) -> "MomentCoefficients":
        return MomentCoefficients(self.frame[idx], self.f0[idx], self.f1[idx], self.M0, self.M1)

    def copy(self) -> "MomentCoefficients":
        return MomentCoefficients(self.frame.copy(), self.f0.copy(), self.f1.copy(), self.M0, self.M1)

    def with_data(self, f0, f1, frame: Optional[ExpansionFrame] = None) -> "MomentCoefficients":
        return MomentCoefficients(self.frame if frame is None else frame, f0, f1, self.M0, self.M1)

    def truncated(self, M0: int) -> "MomentCoefficients":
        """Drop (or zero-pad) degrees above M0 (k = 0) and M0 - 2 (k = 1)."""
        return MomentCoefficients(self.frame, _resize(self.f0, self.M0, M0),
                                  _resize(self.f1, self.M1, M0 - 2), M0, M0 - 2)

    @staticmethod
    def concatenate(states: list["MomentCoefficients"]) -> "MomentCoefficients":
        M0, M1 = states[0].M0, states[0].M1
        if any(s.M0 != M0 or s.M1 != M1 for s in states):
            raise ValueError("states have different truncations")
        return MomentCoefficients(ExpansionFrame.concatenate([s.frame for s in states]),
                                  np.concatenate([np.atleast_2d(s.f0) for s in states]),
                                  np.concatenate([np.atleast_2d(s.f1) for s in states]), M0, M1)


def _resize(a: np.ndarray, M_old: int, M_new: int) -> np.ndarray:
    n_new = moment_layout(max(M_new, 0)).size if M_new >= 0 else 0
    if n_new <= a.shape[-1]:
        return a[..., :n_new].copy()
    out = np.zeros(a.shape[:-1] + (n_new,))
    out[..., :a.shape[-1]] = a
    return out


# --------------------------------------------------------------------------- macroscopic

@dataclass
class MacroscopicState:
    rho: np.ndarray
    u: np.ndarray
    T_tr: np.ndarray
    T_int: np.ndarray
    T_eq: np.ndarray
    p: np.ndarray
    Theta: np.ndarray
    Q: np.ndarray
    q1: np.ndarray
    R: float = 1.0
    delta: float = 2.0

    @property
    def sigma11(self) -> np.ndarray:
        return self.Theta[..., 0, 0] - self.rho * self.R * self.T_tr

    @property
    def momentum(self) -> np.ndarray:
        return self.rho[..., None] * self.u

    @property
    def energy(self) -> np.ndarray:
        """Total (kinetic + translational + internal) energy density."""
        R, d = self.R, self.delta
        return (0.5 * self.rho * np.sum(self.u ** 2, axis=-1)
                + 1.5 * self.rho * R * self.T_tr + 0.5 * d * self.rho * R * self.T_int)


def equilibrium_temperature(T_tr, T_int, delta: float):
    return (3.0 * T_tr + delta * T_int) / (3.0 + delta)


def _idx(layout: MomentLayout, alpha) -> int:
    return layout.find(alpha)


def _e(j: int, n: int = 1) -> tuple[int, int, int]:
    return tuple(n * int(d == j) for d in range(3))


def conserved_frame(coeffs: MomentCoefficients):
    """(rho, u*, T_tr*, T_int*) of the represented distribution, for any frame."""
    fr, R, delta = coeffs.frame, coeffs.frame.R, coeffs.frame.delta
    L0 = coeffs.layout0
    f0 = coeffs.f0
    rho = f0[..., 0]
    if np.any(~(rho > 0)):
        raise InvalidStateError("non-positive density")
    fe = np.stack([f0[..., _idx(L0, _e(j))] for j in range(3)], axis=-1)
    f2e = np.stack([f0[..., _idx(L0, _e(j, 2))] for j in range(3)], axis=-1)
    f01 = coeffs.f1[..., 0]
    u_star = fr.u + fe / rho[..., None]
    # energy identity of the represented f about its own mean velocity
    e_tr = (1.5 * R * fr.T_tr * rho + np.sum(fr.u * fe + f2e, axis=-1)
            + 0.5 * rho * np.sum(fr.u ** 2, axis=-1)
            - 0.5 * rho * np.sum(u_star ** 2, axis=-1))
    T_tr = e_tr / (1.5 * R * rho)
    T_int = fr.T_int - 2.0 * f01 / (delta * rho * R)
    if np.any(~(T_tr > 0)) or np.any(~(T_int > 0)):
        raise InvalidStateError("non-positive recovered temperature")
    return rho, u_star, T_tr, T_int


def conserved_moments(coeffs: MomentCoefficients) -> np.ndarray:
    """Integrals of (1, xi, |xi|^2/2, I^(2/delta)) f, stacked on a trailing axis of 6.

    Linear in the coefficients and valid for any f (fluxes included).
    """
    fr, R, delta = coeffs.frame, coeffs.frame.R, coeffs.frame.delta
    L0 = coeffs.layout0
    f0 = coeffs.f0
    mass = f0[..., 0]
    fe = np.stack([f0[..., _idx(L0, _e(j))] for j in range(3)], axis=-1)
    tr2 = sum(f0[..., _idx(L0, _e(j, 2))] for j in range(3))
    mom = fr.u * mass[..., None] + fe
    e_tr = (0.5 * np.sum(fr.u ** 2, axis=-1) * mass + 1.5 * R * fr.T_tr * mass
            + np.sum(fr.u * fe, axis=-1) + tr2)
    e_int = 0.5 * delta * R * fr.T_int * mass - coeffs.f1[..., 0]
    return np.concatenate([mass[..., None], mom, e_tr[..., None], e_int[..., None]], axis=-1)


def impose_conserved_moments(coeffs: MomentCoefficients, target: np.ndarray) -> None:
    """Adjust f_0, f_e, the f_2e trace and f_01 in place so conserved_moments equals target."""
    fr, R, delta = coeffs.frame, coeffs.frame.R, coeffs.frame.delta
    L0 = coeffs.layout0
    mass = target[..., 0]
    fe = target[..., 1:4] - fr.u * mass[..., None]
    coeffs.f0[..., 0] = mass
    for j in range(3):
        coeffs.f0[..., _idx(L0, _e(j))] = fe[..., j]
    diag = [_idx(L0, _e(j, 2)) for j in range(3)]
    tr2 = (target[..., 4] - 0.5 * np.sum(fr.u ** 2, axis=-1) * mass
           - 1.5 * R * fr.T_tr * mass - np.sum(fr.u * fe, axis=-1))
    shift = (tr2 - sum(coeffs.f0[..., i] for i in diag)) / 3.0
    for i in diag:
        coeffs.f0[..., i] += shift
    coeffs.f1[..., 0] = 0.5 * delta * R * fr.T_int * mass - target[..., 5]


def is_normal(coeffs: MomentCoefficients, rtol: float = 1e-12) -> bool:
    L0 = coeffs.layout0
    rho = coeffs.f0[..., 0]
    scale = np.maximum(np.abs(rho), 1e-300)
    fe = np.stack([coeffs.f0[..., _idx(L0, _e(j))] for j in range(3)], axis=-1)
    tr = sum(coeffs.f0[..., _idx(L0, _e(j, 2))] for j in range(3))
    RT = coeffs.frame.R * np.maximum(coeffs.frame.T_tr, coeffs.frame.T_int)
    return bool(np.all(np.abs(fe) <= rtol * scale[..., None] * np.sqrt(RT)[..., None])
                and np.all(np.abs(tr) <= rtol * scale * RT)
                and np.all(np.abs(coeffs.f1[..., 0]) <= rtol * scale * RT))


def stress_tensor(coeffs: MomentCoefficients) -> np.ndarray:
    """Theta about the expansion velocity u of the frame (any frame)."""
    L0, R = coeffs.layout0, coeffs.frame.R
    rho = coeffs.f0[..., 0]
    Theta = np.empty(coeffs.batch_shape + (3, 3))
    for i in range(3):
        for j in range(3):
            a = tuple(np.add(_e(i), _e(j)))
            Theta[..., i, j] = (1 + (i == j)) * coeffs.f0[..., _idx(L0, a)]
        Theta[..., i, i] += rho * R * coeffs.frame.T_tr
    return Theta


def heat_flux_vector(coeffs: MomentCoefficients) -> np.ndarray:
    """Q_j = 2 f_{3e_j,0} + sum_d f_{e_j+2e_d,0} (normal representation)."""
    L0 = coeffs.layout0
    Q = np.empty(coeffs.batch_shape + (3,))
    for j in range(3):
        val = 2.0 * coeffs.f0[..., _idx(L0, _e(j, 3))]
        for d in range(3):
            val = val + coeffs.f0[..., _idx(L0, tuple(np.add(_e(j), _e(d, 2))))]
        Q[..., j] = val
    return Q


def recover_macroscopic(coeffs: MomentCoefficients, normal_rtol: float = 1e-12) -> MacroscopicState:
    """Macroscopic fields of the represented distribution.

    rho, u and the temperatures come directly from the low-order coefficients in
    any frame.  Theta, Q and q1 are read in the normal representation; a state
    that is not already normal is normalized first.
    """
    if coeffs.M0 < 3:
        raise ValueError("recovering heat fluxes needs M0 >= 3")
    R, delta = coeffs.frame.R, coeffs.frame.delta
    rho, u, T_tr, T_int = conserved_frame(coeffs)
    nrm = coeffs if is_normal(coeffs, normal_rtol) else normalize(coeffs)
    Theta = stress_tensor(nrm)
    Q = heat_flux_vector(nrm)
    q1 = Q[..., 0] - nrm.f1[..., nrm.layout1.find(_e(0))]
    T_eq = equilibrium_temperature(T_tr, T_int, delta)
    return MacroscopicState(rho=rho, u=u, T_tr=T_tr, T_int=T_int, T_eq=T_eq,
                            p=rho * R * T_eq, Theta=Theta, Q=Q, q1=q1, R=R, delta=delta)


def normalize(coeffs: MomentCoefficients, substeps: int = 32) -> MomentCoefficients:
    """Re-express ``coeffs`` in its own (u, T_tr, T_int): the normal representation."""
    from .projection import project

    rho, u, T_tr, T_int = conserved_frame(coeffs)
    target = ExpansionFrame(u, T_tr, T_int, coeffs.frame.R, coeffs.frame.delta)
    out = project(coeffs, target, substeps=substeps)
    enforce_normal(out)
    return out


def enforce_normal(coeffs: MomentCoefficients) -> None:
    """Zero the frame-defining coefficients in place (round-off cleanup)."""
    L0 = coeffs.layout0
    for j in range(3):
        coeffs.f0[..., _idx(L0, _e(j))] = 0.0
    diag = [_idx(L0, _e(j, 2)) for j in range(3)]
    mean = sum(coeffs.f0[..., i] for i in diag) / 3.0
    for i in diag:
        coeffs.f0[..., i] -= mean
    coeffs.f1[..., 0] = 0.0


# --------------------------------------------------------------------------- pointwise values

def evaluate_distribution(coeffs: MomentCoefficients, xi, I) -> np.ndarray:
    """Pointwise f(xi, I) of a single (unbatched) expansion; xi has shape (P, 3)."""
    if coeffs.batch_shape != ():
        raise ValueError("evaluate_distribution expects a single state")
    fr, R, delta = coeffs.frame, coeffs.frame.R, coeffs.frame.delta
    m = fr.m
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    I = np.asarray(I, dtype=float).reshape(-1)
    RTt, RTi = R * float(fr.T_tr), R * float(fr.T_int)
    v = (xi - fr.u) / math.sqrt(RTt)
    J = I ** (2.0 / delta) / RTi
    Mmax = coeffs.M0
    He = hermite_table(Mmax, v.T)                          # (M+1, 3, P)
    gauss = np.exp(-0.5 * np.sum(v ** 2, axis=1)) / (2 * math.pi) ** 1.5
    out = np.zeros(len(I))
    for k, (data, layout) in enumerate(((coeffs.f0, coeffs.layout0), (coeffs.f1, coeffs.layout1))):
        lag = (2.0 / delta / gamma_coefficient(k, m) * RTi ** (-(0.5 * delta + k))
               * laguerre_eval(k, m, J) * np.exp(-J))
        for i, a in enumerate(layout.alphas):
            c = data[i]
            if c == 0.0:
                continue
            herm = He[a[0], 0] * He[a[1], 1] * He[a[2], 2]
            out += c * RTt ** (-(a.sum() + 3) / 2.0) * herm * lag
    return out * gauss
