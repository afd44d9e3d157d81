from pathlib import Path

import pytest
from hypothesis import settings

from cimegraph import synth

settings.register_profile("default", deadline=None)
settings.load_profile("default")

DATA = Path(__file__).parent / "data"

# filled by test_acceptance, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def ieee14():
    return synth.builtin_case("ieee14")


@pytest.fixture(scope="session")
def ieee118():
    return synth.builtin_case("ieee118")


@pytest.fixture(scope="session")
def ieee14_model(ieee14):
    return synth.synthesize_node_breaker(ieee14)


@pytest.fixture(scope="session")
def ieee118_model(ieee118):
    return synth.synthesize_node_breaker(ieee118)
