import numpy as np
import pytest

from polymoment.moments import ExpansionFrame, MomentCoefficients, enforce_normal


def random_state(rng, M0=5, scale=0.05, u=None, T_tr=None, T_int=None, delta=2.0, normal=True):
    """A single moment state near a Maxwellian with random higher coefficients."""
    u = rng.uniform(-0.5, 0.5, 3) if u is None else np.asarray(u, dtype=float)
    T_tr = rng.uniform(0.7, 1.5) if T_tr is None else T_tr
    T_int = rng.uniform(0.7, 1.5) if T_int is None else T_int
    rho = rng.uniform(0.5, 2.0)
    c = MomentCoefficients.zeros(ExpansionFrame(u, np.float64(T_tr), np.float64(T_int), 1.0, delta), M0)
    c.f0[:] = scale * rho * rng.standard_normal(c.f0.shape)
    c.f1[:] = scale * rho * rng.standard_normal(c.f1.shape)
    c.f0[0] = rho
    if normal:
        enforce_normal(c)
    return c


def random_batch(rng, n, M0=5, scale=0.05, delta=2.0):
    states = [random_state(rng, M0, scale, delta=delta) for _ in range(n)]
    return MomentCoefficients.concatenate(states)


@pytest.fixture
def rng():
    return np.random.default_rng(20241015)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
