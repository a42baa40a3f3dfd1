"""Hermite and generalized Laguerre polynomials of the velocity/internal-energy basis.

The Hermite family is the probabilists' one (weight ``exp(-x**2/2)``); the
Laguerre family carries the order ``m = delta/2 - 1`` fixed by the number of
internal degrees of freedom.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class PolynomialDegreeBounds:
    max_hermite_degree: int
    max_laguerre_degree: int
    laguerre_order_m: float

    def __post_init__(self):
        if self.max_hermite_degree < 3:
            raise ValueError("max_hermite_degree must be >= 3")
        if self.max_laguerre_degree < 1:
            raise ValueError("max_laguerre_degree must be >= 1")
        if self.laguerre_order_m <= -1:
            raise ValueError("Laguerre order m must exceed -1")

    @classmethod
    def for_truncation(cls, M0: int, delta: float) -> "PolynomialDegreeBounds":
        return cls(M0 + 1, max(M0 - 1, 1), laguerre_order(delta))


def laguerre_order(delta: float) -> float:
    return 0.5 * delta - 1.0


def hermite_eval(n: int, x):
    """He_n(x) by the three-term recursion He_{n+1} = x He_n - n He_{n-1}."""
    if n < 0:
        raise ValueError("degree must be non-negative")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if n == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = x.copy()
    for k in range(1, n):
        h_prev, h = h, x * h - k * h_prev
    return h if h.ndim else float(h)


def hermite_table(n_max: int, x) -> np.ndarray:
    """All He_0..He_{n_max} at ``x``; shape ``(n_max + 1, *x.shape)``."""
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = x
    for k in range(1, n_max):
        out[k + 1] = x * out[k] - k * out[k - 1]
    return out


def laguerre_eval(k: int, m: float, x):
    """Generalized Laguerre L_k^{(m)}(x).

    Uses (j+1) L_{j+1} = (2j + 1 + m - x) L_j - (j + m) L_{j-1}.
    """
    if k < 0:
        raise ValueError("degree must be non-negative")
    if m <= -1:
        raise ValueError("Laguerre order m must exceed -1")
    x = np.asarray(x, dtype=float)
    l_prev = np.ones_like(x)
    if k == 0:
        return l_prev if l_prev.ndim else float(l_prev)
    l = 1.0 + m - x
    for j in range(1, k):
        l_prev, l = l, ((2 * j + 1 + m - x) * l - (j + m) * l_prev) / (j + 1)
    return l if l.ndim else float(l)


def gamma_coefficient(k: int, m: float) -> float:
    """Gamma(m + k + 1) / Gamma(k + 1), the squared norm of L_k^{(m)}."""
    if m <= -1:
        raise ValueError("Laguerre order m must exceed -1")
    return math.exp(math.lgamma(m + k + 1) - math.lgamma(k + 1))


@lru_cache(maxsize=None)
def hermite_max_root(n: int) -> float:
    """Largest real root of He_n, found by bisection on sign changes."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return 0.0
    # all roots of He_n lie inside |x| < 2 sqrt(n)
    hi = 2.0 * math.sqrt(n) + 1.0
    grid = np.linspace(0.0, hi, 64 * n + 1)
    vals = hermite_eval(n, grid)
    sign_change = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)[0]
    if sign_change.size == 0:
        raise ArithmeticError(f"no root bracket found for He_{n}")
    i = sign_change[-1]
    a, b = float(grid[i]), float(grid[i + 1])
    fa = hermite_eval(n, a)
    if fa == 0.0:
        return a
    for _ in range(200):
        mid = 0.5 * (a + b)
        fm = hermite_eval(n, mid)
        if fm == 0.0 or b - a < 1e-15 * max(1.0, abs(mid)):
            return mid
        if (fm > 0) == (fa > 0):
            a, fa = mid, fm
        else:
            b = mid
    raise ArithmeticError(f"bisection for the largest root of He_{n} did not converge")
