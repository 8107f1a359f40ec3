import random
from pathlib import Path

import pytest

from bookineq.core import Polymatroid, polymatroid_from_json
from bookineq.sampling import V_POLYMATROID

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def U24():
    return Polymatroid.uniform("abcd", 2)


@pytest.fixture
def V():
    return V_POLYMATROID


@pytest.fixture
def free4():
    return Polymatroid.free("abcd")


@pytest.fixture
def rng():
    return random.Random(20240601)


@pytest.fixture
def fixture_path():
    return lambda name: str(FIXTURES / name)


def load(name):
    return polymatroid_from_json((FIXTURES / name).read_text())


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
