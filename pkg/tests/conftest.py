import pytest

from toeplitz_speedup import Substitution, SpeedupSystem, bundled, load_system_spec

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def chi():
    return Substitution.from_dict({"a": "aab", "b": "abb"})


@pytest.fixture(scope="session")
def doubling():
    return Substitution.from_dict({"a": "ab", "b": "aa"})


def load_speedup(name):
    spec = load_system_spec(bundled(name))
    return spec, SpeedupSystem(spec.system, spec.jump)


@pytest.fixture(scope="session")
def new_non():
    return load_speedup("new-non-example")


@pytest.fixture(scope="session")
def not_conjugate():
    return load_speedup("not-conjugate")


@pytest.fixture(scope="session")
def chi_worked():
    return load_speedup("chi-worked")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
