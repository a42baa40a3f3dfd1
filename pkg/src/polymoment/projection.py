"""Frame changes of expanded distributions and multiplication by xi_j.

A change of frame is done in two stages: the internal-energy scale is swapped
first (an affine map between the k = 0 and k = 1 coefficients), then the
velocity centre and translational scale are moved by integrating a linear ODE
in a pseudo-time tau from 0 to 1.  The ODE only couples alpha to alpha - e_d
and alpha - 2 e_d, so the truncated system is closed: every retained
coefficient in the new frame is exact up to the integrator error, whatever
the truncation degree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .moments import (ExpansionFrame, InvalidStateError, MomentCoefficients, axis_shift_tables,
                      moment_layout, padded, shift_table)

DEFAULT_SUBSTEPS = 32


@dataclass
class FrameChangeRequest:
    source: ExpansionFrame
    target: ExpansionFrame
    substeps: int = DEFAULT_SUBSTEPS

    def __post_init__(self):
        if not self.source.same_gas(self.target):
            raise ValueError("source and target frames describe different gases")
        if self.substeps < 1:
            raise ValueError("substeps must be >= 1")


def multiply_by_xi(coeffs: MomentCoefficients, j: int, truncate_to: Optional[int] = None) -> MomentCoefficients:
    """Coefficients of xi_j f in the same frame (``j`` is 0-based here).

    The output degree is M0 + 1 unless ``truncate_to`` asks for fewer.
    """
    if j not in (0, 1, 2):
        raise ValueError("axis index must be 0, 1 or 2")
    fr = coeffs.frame
    M0_out = coeffs.M0 + 1 if truncate_to is None else truncate_to
    M1_out = M0_out - 2 if truncate_to is not None else coeffs.M1 + 1
    e = tuple(int(d == j) for d in range(3))
    minus = tuple(-c for c in e)
    RT = (fr.R * fr.T_tr)[..., None]
    uj = fr.u[..., j][..., None]
    out = []
    for data, M_in, M_out in ((coeffs.f0, coeffs.M0, M0_out), (coeffs.f1, coeffs.M1, M1_out)):
        dst = moment_layout(M_out)
        p = padded(data)
        lower = p[..., shift_table(M_in, M_out, minus)]      # f_{alpha - e_j}
        same = p[..., shift_table(M_in, M_out, (0, 0, 0))]    # f_alpha
        upper = p[..., shift_table(M_in, M_out, e)]           # f_{alpha + e_j}
        out.append(RT * lower + uj * same + (dst.alphas[:, j] + 1) * upper)
    return MomentCoefficients(fr, out[0], out[1], M0_out, M1_out)


def rescale_internal_temperature(coeffs: MomentCoefficients, new_T_int) -> MomentCoefficients:
    """Swap the internal-energy scale of the basis to ``new_T_int``."""
    fr = coeffs.frame
    new_T_int = np.broadcast_to(np.asarray(new_T_int, dtype=float), fr.batch_shape).copy()
    if np.any(~(new_T_int > 0)):
        raise InvalidStateError("target internal temperature must be positive")
    shift = (0.5 * fr.delta * fr.R * (new_T_int - fr.T_int))[..., None]
    n1 = coeffs.f1.shape[-1]
    f1 = coeffs.f1 + shift * coeffs.f0[..., :n1]
    frame = ExpansionFrame(fr.u, fr.T_tr, new_T_int, fr.R, fr.delta)
    return MomentCoefficients(frame, coeffs.f0.copy(), f1, coeffs.M0, coeffs.M1)


def _frame_ode_rhs(F: np.ndarray, M: int, lo1: np.ndarray, lo2: np.ndarray,
                   a2: np.ndarray, a1: np.ndarray) -> np.ndarray:
    """sum_d [a2 F_{alpha-2e_d} + a1_d F_{alpha-e_d}] for one k-block."""
    p = padded(F)
    return (a2[..., None] * p[..., lo2].sum(axis=-2)
            + np.einsum("...d,...dn->...n", a1, p[..., lo1]))


def change_velocity_frame(coeffs: MomentCoefficients, request: FrameChangeRequest) -> MomentCoefficients:
    """Move u and T_tr of the frame to the request's target with classical RK4.

    The internal temperature of ``coeffs`` must already equal the target's.
    """
    src, tgt = request.source, request.target
    if not np.allclose(coeffs.frame.T_int, tgt.T_int, rtol=1e-14, atol=0):
        raise ValueError("rescale the internal temperature before the velocity-frame change")
    if np.any(~(tgt.T_tr > 0)) or np.any(~(src.T_tr > 0)):
        raise InvalidStateError("temperature ratio undefined for non-positive T_tr")
    RT = src.R * src.T_tr
    That = np.sqrt(src.T_tr / tgt.T_tr)
    du = src.u - tgt.u
    frame = ExpansionFrame(tgt.u, tgt.T_tr, tgt.T_int, tgt.R, tgt.delta)
    if np.all(That == 1.0) and not np.any(du):
        return MomentCoefficients(frame, coeffs.f0.copy(), coeffs.f1.copy(), coeffs.M0, coeffs.M1)

    tables = [(axis_shift_tables(M, M, -1), axis_shift_tables(M, M, -2), M)
              for M in (coeffs.M0, coeffs.M1)]

    def rhs(tau, Fs):
        s = (That - 1.0) * tau + 1.0
        S = (That - 1.0) / s
        w = 1.0 / s ** 2                      # [1 - tau S]^2
        a2 = w * S * RT
        a1 = (w * That)[..., None] * du
        return [_frame_ode_rhs(F, M, lo1, lo2, a2, a1) for F, (lo1, lo2, M) in zip(Fs, tables)]

    Fs = [coeffs.f0.copy(), coeffs.f1.copy()]
    h = 1.0 / request.substeps
    for n in range(request.substeps):
        t = n * h
        k1 = rhs(t, Fs)
        k2 = rhs(t + 0.5 * h, [F + 0.5 * h * k for F, k in zip(Fs, k1)])
        k3 = rhs(t + 0.5 * h, [F + 0.5 * h * k for F, k in zip(Fs, k2)])
        k4 = rhs(t + h, [F + h * k for F, k in zip(Fs, k3)])
        Fs = [F + (h / 6.0) * (a + 2 * b + 2 * c + d) for F, a, b, c, d in zip(Fs, k1, k2, k3, k4)]
    return MomentCoefficients(frame, Fs[0], Fs[1], coeffs.M0, coeffs.M1)


def _exp_shift_weights(a: np.ndarray, b: np.ndarray, M: int) -> np.ndarray:
    """c_n with exp(a L^2 + b L) = sum_n c_n L^n, n = 0..M, for a nilpotent shift L."""
    a, b = np.broadcast_arrays(a, b)
    c = np.zeros(np.shape(b) + (M + 1,))
    c[..., 0] = 1.0
    if M >= 1:
        c[..., 1] = b
    for n in range(2, M + 1):     # n c_n = b c_{n-1} + 2 a c_{n-2}
        c[..., n] = (b * c[..., n - 1] + 2.0 * a * c[..., n - 2]) / n
    return c


@lru_cache(maxsize=None)
def _axis_power_tables(M: int) -> np.ndarray:
    """(3, M + 1, n) gather tables for L_d^n, n = 0..M."""
    return np.stack([np.stack([shift_table(M, M, tuple(-n * int(d == e) for e in range(3)))
                               for n in range(M + 1)]) for d in range(3)])


def exact_velocity_frame_change(coeffs: MomentCoefficients, target: ExpansionFrame) -> MomentCoefficients:
    """Closed-form solution of the frame-change ODE.

    The right-hand side only involves the commuting lowering shifts L_d, so the
    flow over tau in [0, 1] is exp(a sum_d L_d^2 + sum_d b_d L_d) with
    a = R (T_tr - T_tr') / 2 and b = u - u'.  On the truncated space the
    exponential is a finite sum, applied one axis at a time.
    """
    src = coeffs.frame
    if not np.allclose(src.T_int, target.T_int, rtol=1e-14, atol=0):
        raise ValueError("rescale the internal temperature before the velocity-frame change")
    if np.any(~(target.T_tr > 0)):
        raise InvalidStateError("target translational temperature must be positive")
    a = 0.5 * src.R * (src.T_tr - target.T_tr)
    b = src.u - target.u
    frame = ExpansionFrame(target.u, target.T_tr, target.T_int, target.R, target.delta)
    out = []
    for F, M in ((coeffs.f0, coeffs.M0), (coeffs.f1, coeffs.M1)):
        w = _exp_shift_weights(a[..., None], b, M)          # (..., 3, M+1)
        tables = _axis_power_tables(M)
        for d in range(3):
            F = np.matmul(w[..., d, None, :], padded(F)[..., tables[d]])[..., 0, :]
        out.append(F)
    return MomentCoefficients(frame, out[0], out[1], coeffs.M0, coeffs.M1)


def project(coeffs: MomentCoefficients, target: ExpansionFrame,
            substeps: int = DEFAULT_SUBSTEPS, method: str = "rk4") -> MomentCoefficients:
    """Re-express ``coeffs`` in ``target`` (internal scale first, then velocity).

    ``method`` selects RK4 integration of the frame ODE or its closed form ("exact").
    """
    src = coeffs.frame
    if not src.same_gas(target):
        raise ValueError("frames describe different gases")
    target = _broadcast_frame(target, coeffs.batch_shape)
    mid = rescale_internal_temperature(coeffs, target.T_int)
    if method == "exact":
        return exact_velocity_frame_change(mid, target)
    if method != "rk4":
        raise ValueError(f"unknown projection method '{method}'")
    return change_velocity_frame(mid, FrameChangeRequest(mid.frame, target, substeps))


def to_common_frame(states: Sequence[MomentCoefficients], frame: ExpansionFrame,
                    substeps: int = DEFAULT_SUBSTEPS, method: str = "rk4") -> list[MomentCoefficients]:
    """Express every state in ``frame`` so that linear combinations act coefficient-wise."""
    if any(not s.frame.same_gas(frame) for s in states):
        raise ValueError("all states must share R and delta with the common frame")
    return [project(s, frame, substeps, method) for s in states]


def _broadcast_frame(frame: ExpansionFrame, shape: tuple[int, ...]) -> ExpansionFrame:
    if frame.batch_shape == shape:
        return frame
    return ExpansionFrame(np.broadcast_to(frame.u, shape + (3,)).copy(),
                          np.broadcast_to(frame.T_tr, shape).copy(),
                          np.broadcast_to(frame.T_int, shape).copy(), frame.R, frame.delta)
