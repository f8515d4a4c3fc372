import functools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from spinorder.models import dimer_superposition, ghz_state, heisenberg, lanczos_ground_state, neel_ghz_state

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@functools.lru_cache(maxsize=None)
def heisenberg_ground_state(n):
    return lanczos_ground_state(heisenberg(n))


@pytest.fixture(scope="session")
def heis12():
    return heisenberg_ground_state(12)


@pytest.fixture(scope="session")
def heis16():
    return heisenberg_ground_state(16)


@pytest.fixture(scope="session")
def ghz12():
    return ghz_state(12)


@pytest.fixture(scope="session")
def neel12():
    return neel_ghz_state(12)


@pytest.fixture(scope="session")
def dimer16():
    return dimer_superposition(16)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_state_amplitudes(rng, n, complex_=True):
    psi = rng.normal(size=1 << n)
    if complex_:
        psi = psi + 1j * rng.normal(size=1 << n)
    return psi / np.linalg.norm(psi)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in RESULTS:
        terminalreporter.write_line(line)
