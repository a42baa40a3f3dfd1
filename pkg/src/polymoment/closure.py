"""Linearized regularization: the first truncated degree from gradients of the last retained one."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .moments import MomentCoefficients, moment_layout, padded, shift_table


@dataclass
class ClosureInput:
    center: MomentCoefficients
    left_neighbor: MomentCoefficients
    right_neighbor: MomentCoefficients
    dx: float
    mu: np.ndarray
    Pr: float
    p: np.ndarray

    def __post_init__(self):
        if not self.dx > 0:
            raise ValueError("dx must be positive")
        c = self.center.frame
        for nb in (self.left_neighbor, self.right_neighbor):
            f = nb.frame
            if not (f.same_gas(c) and np.array_equal(f.u, c.u) and np.array_equal(f.T_tr, c.T_tr)
                    and np.array_equal(f.T_int, c.T_int)):
                raise ValueError("closure neighbours must be expressed in the centre's frame")
            if nb.M0 != self.center.M0 or nb.M1 != self.center.M1:
                raise ValueError("closure neighbours have a different truncation")


def closure_coefficients(inp: ClosureInput) -> tuple[np.ndarray, np.ndarray]:
    """f_{alpha,k} for |alpha| = M_k + 1 as -(mu / (Pr p)) R T_tr d/dx f_{alpha - e_1,k}.

    Only the x-derivative survives in 1D.  Returns the two degree blocks
    (k = 0 and k = 1) in layout order of degrees M0 + 1 and M1 + 1.
    """
    c = inp.center
    fr = c.frame
    coef = -(np.asarray(inp.mu) / (inp.Pr * np.asarray(inp.p)) * fr.R * fr.T_tr)[..., None]
    out = []
    for M, left, right in ((c.M0, inp.left_neighbor.f0, inp.right_neighbor.f0),
                           (c.M1, inp.left_neighbor.f1, inp.right_neighbor.f1)):
        top = moment_layout(M + 1).degree_slice(M + 1)
        src = shift_table(M, M + 1, (-1, 0, 0))[top]
        grad = (padded(right)[..., src] - padded(left)[..., src]) / (2.0 * inp.dx)
        out.append(coef * grad)
    return out[0], out[1]


def augment(coeffs: MomentCoefficients, top0: np.ndarray, top1: np.ndarray) -> MomentCoefficients:
    """Append closure blocks as degree M0 + 1 (k = 0) and M1 + 1 (k = 1)."""
    f0 = np.concatenate([coeffs.f0, top0], axis=-1)
    f1 = np.concatenate([coeffs.f1, top1], axis=-1)
    return MomentCoefficients(coeffs.frame, f0, f1, coeffs.M0 + 1, coeffs.M1 + 1)
