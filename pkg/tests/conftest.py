import math
import sys
import warnings

import numpy as np
import pytest

from semigroup_regularity import PowerSymbol, SpectralSymbols, SystemConfig, build_spectrum


def dirichlet(n=2000, length=math.pi):
    return build_spectrum("dirichlet_1d", {"length": length}, n)


def standard_config(mu, theta, n=2000, length=math.pi, alpha=1.0, beta=0.5, gamma=1.0):
    return SystemConfig(alpha, beta, gamma, mu, theta, dirichlet(n, length))


def random_coercive_config(rng, n_modes=64):
    """A random coercive system with power-law symbols on a random closed-form spectrum."""
    kind = rng.choice(["dirichlet_1d", "dirichlet_2d_rectangle", "hinged_plate_1d", "hinged_plate_2d"])
    if kind.endswith("1d"):
        params = {"length": float(rng.uniform(2.0, 6.0))}
    else:
        params = {"lx": float(rng.uniform(2.0, 6.0)), "ly": float(rng.uniform(2.0, 6.0))}
    spectrum = build_spectrum(kind, params, n_modes)
    mu, theta = rng.uniform(0.05, 1.0, 2)
    if kind.startswith("hinged"):
        e1 = e2 = 1.0
    else:
        e1, e2 = rng.uniform(0.5, 1.5, 2)
    a1 = PowerSymbol(rng.uniform(0.5, 2.0), e1)
    a2 = PowerSymbol(rng.uniform(0.5, 2.0), e2)
    b1 = PowerSymbol(rng.uniform(0.5, 2.0), mu * e1)
    b2 = PowerSymbol(rng.uniform(0.5, 2.0), theta * e2)
    symbols = SpectralSymbols(a1, a2, b1, b2)
    alpha, gamma = rng.uniform(0.3, 3.0, 2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        probe = SystemConfig(alpha, 1.0, gamma, mu, theta, spectrum, symbols, allow_noncoercive=True)
        alpha0 = probe.hypotheses.alpha0
        beta = rng.choice([-1.0, 1.0]) * math.sqrt(alpha * gamma / alpha0) * rng.uniform(0.05, 0.95)
        return SystemConfig(alpha, beta, gamma, mu, theta, spectrum, symbols)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def make_random_config():
    return random_coercive_config


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not getattr(module, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.TITLES):
        terminalreporter.write_line(module.format_line(number))
