import numpy as np
import pytest
from scipy.special import jv

from ctqw import LatticeSpec, WalkerState


def bessel_amplitudes(sites, t, gamma=1.0, epsilon=0.0):
    """Infinite-chain amplitudes of a walker started on site 0 (hopping -gamma)."""
    sites = np.asarray(sites)
    return (1j) ** sites * np.exp(-1j * epsilon * t) * jv(sites, 2 * gamma * t)


def random_state(n, rng):
    psi = rng.normal(size=n) + 1j * rng.normal(size=n)
    return WalkerState(psi / np.linalg.norm(psi))


def state_on(spec, amplitudes_by_site):
    psi = np.zeros(spec.num_sites, dtype=complex)
    for j, a in amplitudes_by_site.items():
        psi[spec.index(j)] = a
    return WalkerState(psi)


@pytest.fixture
def rng():
    return np.random.default_rng(20231016)


@pytest.fixture
def small():
    return LatticeSpec(64 + 1)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one pass/fail line for the acceptance summary, then assert."""

    def check(number, ok, detail):
        ACCEPTANCE_LINES.append(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
