import numpy as np
import pytest

from lpv_lssvm import Dataset

ACCEPTANCE_LINES = []


def record_acceptance(criterion, passed, detail):
    ACCEPTANCE_LINES.append((criterion, passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in sorted(ACCEPTANCE_LINES, key=lambda t: t[0]):
        terminalreporter.write_line(
            f"criterion {criterion}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_dataset(rng, N, n_p=1, Ts=1.0):
    return Dataset(rng.standard_normal(N), rng.standard_normal(N),
                   rng.uniform(-0.25, 0.25, size=(N, n_p)), Ts)


@pytest.fixture
def small_data(rng):
    return random_dataset(rng, 12)
