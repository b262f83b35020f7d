from pathlib import Path

import numpy as np
import pytest

from workqp.operators import DensityMatrix, EvolutionSpec
from workqp.work import Scenario

FIXTURES = Path(__file__).parent / "fixtures"

PLUS = np.array([1.0, 1.0]) / np.sqrt(2)
MINUS = np.array([1.0, -1.0]) / np.sqrt(2)
SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]])
SIGMA_Z = np.diag([1.0, -1.0])

_ACCEPTANCE: list[tuple[str, bool, str]] = []


def qubit_scenario(state=PLUS, u=None) -> Scenario:
    """H(0) = diag(0, 1), H(tau) = sigma_x, evolved final basis |+-> when u is None."""
    u = np.eye(2) if u is None else u
    rho = state if isinstance(state, DensityMatrix) else DensityMatrix.pure(state)
    return Scenario.from_hamiltonians(np.diag([0.0, 1.0]), SIGMA_X, EvolutionSpec.direct(u), rho)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def qubit_plus():
    return qubit_scenario()


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def acceptance():
    def record(criterion: str, passed: bool, detail: str) -> None:
        line = f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}"
        print(line)
        _ACCEPTANCE.append((criterion, passed, line))

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, _, line in sorted(_ACCEPTANCE, key=lambda r: int(r[0].split()[0])):
        terminalreporter.write_line(line)
