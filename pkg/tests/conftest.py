import pytest

from sparse_cran.topology import NetworkConfig, build_layout


@pytest.fixture(scope="session")
def toy_layout():
    return build_layout(NetworkConfig.toy(rng_seed=7))


@pytest.fixture(scope="session")
def desk_layout():
    return build_layout(NetworkConfig.desk(rng_seed=3))


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
