"""Acceptance criteria 1-11. Each test prints one ``Criterion N: PASS/FAIL`` line.

Run just this file with ``pytest tests/test_acceptance.py -v -s`` or ``python tests/test_acceptance.py``.
The long runs are marked ``slow``; deselect them with ``-m "not slow"``.
"""
import math
from functools import lru_cache

import numpy as np
import pytest
from scipy.special import gamma

from conftest import random_state
from oracles import as_dicts, es_bgk_covariance, gaussian_coefficients_by_quadrature, relax_in_fixed_frame
from polymoment.basis import gamma_coefficient, hermite_eval, hermite_table, laguerre_eval
from polymoment.config import DVMOptions, GasModel, GridSpec, ShockStructure, SimulationConfig, nitrogen_gas
from polymoment.dvm import collide_reduced, reduce_macroscopic, run_dvm
from polymoment.esbgk import CollisionParameters, collision_step, gaussian_coefficients
from polymoment.moments import (ExpansionFrame, conserved_moments, moment_layout, recover_macroscopic,
                                total_moment_count)
from polymoment.profiles import profile_columns
from polymoment.projection import project
from polymoment.solver import run

RESULTS = {}


def verdict(n, ok, detail=""):
    line = f"Criterion {n}: {'PASS' if ok else 'FAIL'}" + (f"  ({detail})" if detail else "")
    RESULTS[n] = line
    print(line)
    assert ok, line


def composite_gauss(f, a, b, panels=200, order=20):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    return sum(0.5 * (hi - lo) * np.dot(w, f(0.5 * (hi - lo) * x + 0.5 * (hi + lo)))
               for lo, hi in zip(edges[:-1], edges[1:]))


def anisotropic_state(rng, M0, stress=0.15):
    c = random_state(rng, M0=M0, scale=0.0)
    L, rho = c.layout0, c.f0[0]
    for i in range(3):
        for j in range(i, 3):
            c.f0[L.find(tuple(int(i == d) + int(j == d) for d in range(3)))] = stress * rho * rng.uniform(-1, 1)
    diag = [L.find(a) for a in ((2, 0, 0), (0, 2, 0), (0, 0, 2))]
    c.f0[diag] -= c.f0[diag].sum() / 3
    return c


@lru_cache(maxsize=None)
def shock_tube(M0, Kn, Pr, Z, n_cells, t_end=0.3):
    cfg = SimulationConfig(gas=GasModel(Kn=Kn, Pr=Pr, Z=Z), M0=M0, t_end=t_end, grid=GridSpec(-2.0, 2.0, n_cells))
    res = run(cfg)
    return recover_macroscopic(res.final.grid.cells), res


def l1(a, dx):
    return float(np.abs(a).sum() * dx)


def test_criterion_01_moment_counts():
    counts = [total_moment_count(M0) for M0 in range(3, 9)]
    verdict(1, counts == [24, 45, 76, 119, 176, 249], f"counts={counts}")


def test_criterion_02_polynomial_identities():
    worst = 0.0
    for n1 in range(9):
        for n2 in range(9):
            val = composite_gauss(lambda x: hermite_eval(n1, x) * hermite_eval(n2, x) * np.exp(-x * x / 2), -12, 12)
            exact = math.factorial(n1) * math.sqrt(2 * math.pi) if n1 == n2 else 0.0
            worst = max(worst, abs(val - exact) / max(1.0, exact))
    for m in (0.0, 0.5):
        for k1 in range(7):
            for k2 in range(7):
                f = lambda s: 2 * s * laguerre_eval(k1, m, s * s) * laguerre_eval(k2, m, s * s) * (s * s) ** m * np.exp(-s * s)
                exact = gamma_coefficient(k1, m) if k1 == k2 else 0.0
                worst = max(worst, abs(composite_gauss(f, 0.0, 10.0) - exact) / max(1.0, exact))
    x = np.linspace(-4, 4, 17)
    tab = hermite_table(10, x)
    rec = max(np.abs(tab[n + 1] - x * tab[n] + n * tab[n - 1]).max() for n in range(1, 10))
    h = 1e-5
    diff = max(np.abs((hermite_eval(n, x + h) * np.exp(-(x + h) ** 2 / 2) - hermite_eval(n, x - h) * np.exp(-(x - h) ** 2 / 2))
                      / (2 * h) + hermite_eval(n + 1, x) * np.exp(-x * x / 2)).max() for n in range(7))
    gam = abs(gamma_coefficient(3, 1.5) - gamma(5.5) / gamma(4)) / gamma_coefficient(3, 1.5)
    ok = worst < 1e-8 and rec < 1e-10 and diff < 1e-6 and gam < 1e-12
    verdict(2, ok, f"orthogonality {worst:.1e}, recursion {rec:.1e}, derivative {diff:.1e}")


def test_criterion_03_gaussian_expansion_oracle():
    rng = np.random.default_rng(3)
    worst, odd_zero = 0.0, True
    for _ in range(20):
        c = anisotropic_state(rng, 4)
        G = gaussian_coefficients(c, 0.72, 5.0)
        m = recover_macroscopic(c)
        ref = gaussian_coefficients_by_quadrature(m.rho, es_bgk_covariance(m.rho, m.Theta, m.T_tr, m.T_eq, 0.72, 5.0),
                                                  m.T_tr, 4)
        for alpha, val in as_dicts(G)[0].items():
            scale = m.rho * m.T_tr ** (sum(alpha) / 2)
            worst = max(worst, abs(val - ref[alpha]) / max(abs(ref[alpha]), scale))
            odd_zero &= sum(alpha) % 2 == 0 or val == 0.0
    # Pr = Z = 1: the target is the isotropic Maxwellian once T_int = T_tr
    c = anisotropic_state(rng, 6)
    c.frame.T_int = c.frame.T_tr.copy()
    G = gaussian_coefficients(c, 1.0, 1.0)
    bgk = max(np.abs(G.f0[1:]).max(), np.abs(G.f1).max()) / G.f0[0]
    verdict(3, worst < 1e-7 and odd_zero and bgk < 1e-15,
            f"max rel err {worst:.1e}, odd exactly zero {odd_zero}, BGK |G|/rho {bgk:.1e}")


def test_criterion_04_collision_exactness():
    rng = np.random.default_rng(4)
    c = anisotropic_state(rng, 5)
    eps, Pr, Z = 0.2, 0.72, 5.0
    p = CollisionParameters(Pr, np.float64(Z), np.float64(eps))
    T_tr, T_int = float(c.frame.T_tr), float(c.frame.T_int)
    T_eq = (3 * T_tr + 2 * T_int) / 5
    worst = 0.0
    for dt in (0.01, 0.3, 2.0):
        out = collision_step(c, p, dt)
        d = math.exp(-dt / (eps * Z))
        worst = max(worst, abs(float(out.frame.T_tr) - T_eq - (T_tr - T_eq) * d) / T_eq,
                    abs(float(out.frame.T_int) - T_eq - (T_int - T_eq) * d) / T_eq)
        for a in ((2, 0, 0), (1, 1, 0), (0, 1, 1)):
            worst = max(worst, abs(out.coefficient(a) - c.coefficient(a) * math.exp(-dt / (eps * Pr))) / abs(c.coefficient(a)))

    c = anisotropic_state(rng, 4)
    c.set_coefficient((3, 0, 0), 0, 0.05 * c.f0[0])
    c.f0[c.layout0.degree_slice(3)] += 0.01 * rng.standard_normal(10)
    p, t = CollisionParameters(Pr, np.float64(Z), np.float64(0.1)), 0.2
    ref0, ref1 = relax_in_fixed_frame(*as_dicts(c), c.frame.u, float(c.frame.T_tr), float(c.frame.T_int),
                                      Pr, Z, 0.1, t, c.M0, steps=800)
    ref = np.array(list(ref0.values()) + list(ref1.values()))
    errs = []
    for n in (4, 8, 16):
        s = c
        for _ in range(n):
            s = collision_step(s, p, t / n)
        g0, g1 = as_dicts(project(s, c.frame, method="exact"))
        errs.append(np.abs(np.array([g0[a] for a in ref0] + [g1[a] for a in ref1]) - ref).max())
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    ok = worst < 1e-12 and np.all(np.abs(orders - 2.0) < 0.1)
    verdict(4, ok, f"analytic rel err {worst:.1e}, observed orders {np.round(orders, 3).tolist()}")


@pytest.mark.slow
def test_criterion_05_conservation():
    # 200 cells keeps the diffusive time-step limit affordable; drift does not depend on resolution
    _, res = shock_tube(5, 0.5, 0.72, 5.0, 200)
    drift = res.conservation_drift()
    verdict(5, bool(np.all(drift < 1e-8)) and res.final.t == pytest.approx(0.3),
            f"{res.steps} steps, drift mass/mom/energy {np.array2string(drift, precision=1)}")


def test_criterion_06_projection_fidelity():
    rng = np.random.default_rng(6)
    low, cons = 0.0, 0.0
    for _ in range(10):
        c = random_state(rng, M0=6, scale=0.05)
        sq = math.sqrt(float(c.frame.T_tr))
        tgt = ExpansionFrame(c.frame.u + rng.uniform(-2, 2, 3) * sq / math.sqrt(3),
                             np.float64(float(c.frame.T_tr) * rng.uniform(0.5, 2)),
                             np.float64(float(c.frame.T_int) * rng.uniform(0.5, 2)))
        back = project(project(c, tgt), c.frame)
        n0, n1 = moment_layout(c.M0 - 2).size, moment_layout(c.M1 - 2).size
        scale = np.abs(c.f0).max()
        low = max(low, np.abs(back.f0[:n0] - c.f0[:n0]).max() / scale, np.abs(back.f1[:n1] - c.f1[:n1]).max() / scale)
        w0 = conserved_moments(c)
        cons = max(cons, np.abs(conserved_moments(back) - w0).max() / np.abs(w0).max())
    verdict(6, low < 1e-8 and cons < 1e-9, f"low-degree err {low:.1e}, conserved err {cons:.1e}")


# the reference is the first-order upwind DVM; 200 cells is the resolution the criterion allows
N_C7 = 200


@lru_cache(maxsize=None)
def dvm_reference_rho():
    cfg = SimulationConfig(solver="dvm", gas=GasModel(Kn=0.05, Pr=0.72, Z=5.0), t_end=0.3,
                           grid=GridSpec(-2.0, 2.0, N_C7), dvm=DVMOptions(n_v=400))
    return reduce_macroscopic(run_dvm(cfg).final.grid.state).rho


@pytest.mark.slow
def test_criterion_07_convergence_in_M0():
    ref = dvm_reference_rho()
    dx = 4.0 / N_C7
    errs = [l1(shock_tube(M0, 0.05, 0.72, 5.0, N_C7)[0].rho - ref, dx) for M0 in (3, 4, 5, 6)]
    rel = [e / l1(ref, dx) for e in errs]
    ok = all(b <= a for a, b in zip(errs, errs[1:])) and rel[2] < 0.02
    verdict(7, ok, "relative L1 for M0=3..6: " + ", ".join(f"{r:.2e}" for r in rel))


@pytest.mark.slow
def test_criterion_08_bgk_vs_esbgk():
    es, _ = shock_tube(5, 0.05, 0.72, 5.0, 400)
    bgk, _ = shock_tube(5, 0.05, 1.0, 1.0, 400)
    gap_es = np.abs(es.T_tr - es.T_int).max()
    gap_bgk = np.abs(bgk.T_tr - bgk.T_int).max()
    drho = l1(bgk.rho - es.rho, 0.01) / l1(es.rho, 0.01)
    verdict(8, gap_es >= 2 * gap_bgk and drho < 0.02,
            f"max|T_tr-T_int| ES {gap_es:.3e} vs BGK {gap_bgk:.3e}, density L1 diff {drho:.2%}")


@pytest.mark.slow
def test_criterion_09_monatomic_limit():
    T = {Z: shock_tube(5, 0.01, 2.0 / 3.0, float(Z), 400)[0].T_tr for Z in (1, 10, 100, 1000)}
    far, near = l1(T[10] - T[1], 0.01), l1(T[1000] - T[100], 0.01)
    verdict(9, near < far, f"L1(Z1000-Z100) {near:.3e} < L1(Z10-Z1) {far:.3e}")


# [-1.5, 1.5] clips the relaxation tails at the 1e-3 level and the shock never settles to 1e-6;
# on [-3.6, 3.6] the tails have decayed, and dx = 0.03 keeps the run to a few minutes
NITROGEN_GRID = GridSpec(-3.6, 3.6, 240)


@pytest.mark.slow
def test_criterion_10_nitrogen_shock_structure():
    cfg = SimulationConfig(gas=nitrogen_gas(0.1), M0=3, t_end=None, initial=ShockStructure(Ma=1.53),
                           grid=NITROGEN_GRID)
    res = run(cfg)
    col = profile_columns(res.final.grid, cfg)
    x, rho, T_tr, T_int = col["x"], col["rho_hat"], col["T_tr_hat"], col["T_int_hat"]
    drop = float(np.diff(rho).min())
    monotone = drop > -1e-6
    x_tr, x_int = np.interp(0.5, T_tr, x), np.interp(0.5, T_int, x)
    ahead = bool(x_tr < x_int and (T_tr - T_int).max() > 0)
    verdict(10, res.steady and monotone and ahead,
            f"steady {res.steady} after {res.steps} steps (t={res.final.t:.1f}), min diff(rho_hat) {drop:.1e}, "
            f"T_tr_hat=0.5 at x={x_tr:.3f} vs T_int_hat at x={x_int:.3f}")


@pytest.mark.slow
def test_criterion_11_dvm_health():
    rho, states = {}, {}
    for n_v in (100, 200, 400, 800):
        cfg = SimulationConfig(solver="dvm", gas=GasModel(Kn=0.05), grid=GridSpec(-2.0, 2.0, 100), t_end=0.3,
                               dvm=DVMOptions(n_v=n_v))
        states[n_v] = run_dvm(cfg).final.grid.state
        rho[n_v] = reduce_macroscopic(states[n_v]).rho
    ks = sorted(rho)
    diffs = np.array([l1(rho[b] - rho[a], 0.04) for a, b in zip(ks, ks[1:])])
    orders = np.log2(diffs[:-1] / diffs[1:])
    state, worst = states[400], 0.0
    for _ in range(10):
        new = collide_reduced(state, 0.01, 0.72, 5.0, 0.05)
        t0, t1 = state.totals(), new.totals()
        worst = max(worst, np.abs(t1 - t0).max() / np.abs(t0).max())
        state = new
    ok = bool(np.all(np.diff(diffs) < 0)) and orders.min() > 1.5 and worst < 1e-10
    verdict(11, ok, f"lattice diffs {np.array2string(diffs, precision=2)}, orders {np.round(orders, 2).tolist()}, "
                    f"collision conservation {worst:.1e}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
