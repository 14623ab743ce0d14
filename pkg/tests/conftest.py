import pytest
from hypothesis import HealthCheck, settings

from stabrad import StructureSpace, grcar

settings.register_profile(
    "stabrad",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("stabrad")


@pytest.fixture(scope="session")
def grcar10():
    return grcar(10, 1.0)


@pytest.fixture(scope="session")
def sparsity10(grcar10):
    return StructureSpace.sparsity_of(grcar10)


@pytest.fixture(scope="session")
def toeplitz10():
    return StructureSpace.toeplitz_band(10, 1, 3)


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE

    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
