import numpy as np
import pytest

from mixture_evidence import GammaPrior, NIGPrior, hyperparams_from_data


def small_fm_data():
    """n=8 draws from an overlapping two-component mixture (fixed seed)."""
    rng = np.random.default_rng(2024)
    z = rng.random(8) < 0.5
    return np.where(z, -1.5, 1.5) + rng.standard_normal(8)


def small_dpm_data():
    rng = np.random.default_rng(7)
    return np.concatenate([rng.normal(-2, 1, 3), rng.normal(2, 1, 3)])


@pytest.fixture
def fm_instance():
    y = small_fm_data()
    return y, hyperparams_from_data(y)


@pytest.fixture
def tiny_fm_instance():
    rng = np.random.default_rng(5)
    y = np.concatenate([rng.normal(-1, 1, 3), rng.normal(1.5, 1, 3)])
    return y, hyperparams_from_data(y)


@pytest.fixture
def dpm_instance():
    y = small_dpm_data()
    return y, hyperparams_from_data(y), GammaPrior(1.0, 1.0)


@pytest.fixture
def unit_prior():
    return NIGPrior(mu0=0.0, lambda0=1.0, a0=1.0, b0=1.0)


ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def report():
    """Record one pass/fail line per acceptance criterion."""

    def add(number: int, ok: bool, detail: str):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)

    return add


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
