import pytest

from gsrecon.wavelets import make_family

ACCEPTANCE_LINES = []


def record(criterion: str, passed: bool, detail: str) -> None:
    """Remember one acceptance verdict; all of them are echoed in the terminal summary."""
    line = f"{'PASS' if passed else 'FAIL'}  criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def haar():
    return make_family("haar")


@pytest.fixture(scope="session")
def db4():
    return make_family("db4")


@pytest.fixture(scope="session")
def db6():
    return make_family("db6")
