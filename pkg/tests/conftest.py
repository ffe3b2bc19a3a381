import math
from pathlib import Path

import numpy as np
import pytest

from cpcomb.comb import make_decoration
from cpcomb.lattice import make_basis
from cpcomb.scheme import validate_scheme
from cpcomb.weights import Gaussian

PHI = (1 + math.sqrt(5)) / 2
CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture(scope="session")
def golden_basis():
    return make_basis([[1.0, 1.0], [PHI, -1 / PHI]])


@pytest.fixture(scope="session")
def golden(golden_basis):
    return validate_scheme(1, 1, golden_basis, 100, 0.05)


@pytest.fixture(scope="session")
def gauss():
    return Gaussian(m=1, width=1.0)


@pytest.fixture(scope="session")
def unit_dec(golden):
    return make_decoration(golden)


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, ok: bool, detail: str) -> None:
    """Store and print one PASS/FAIL line for an acceptance criterion."""
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
