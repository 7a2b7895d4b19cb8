import numpy as np
import pytest

from resonance_recoil import load_species, make_pair

_CRITERIA: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and not report.passed):
        detail = ""
        if report.failed:
            detail = str(report.longrepr.reprcrash.message) if hasattr(report.longrepr, "reprcrash") else ""
            detail = detail.splitlines()[0] if detail else ""
        status = "PASS" if report.passed else "FAIL"
        _CRITERIA[number] = (status, title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        status, title, detail = _CRITERIA[number]
        line = f"{status} criterion {number}: {title}"
        terminalreporter.write_line(f"{line} ({detail})" if detail else line)


@pytest.fixture(scope="session")
def registry():
    return load_species()


@pytest.fixture(scope="session")
def rb(registry):
    return registry["RB87_5P12"]


@pytest.fixture(scope="session")
def k40(registry):
    return registry["K40_GS"]


@pytest.fixture(scope="session")
def pair(rb, k40):
    """Rb/K at k_A R = 1.28, dipoles along z, axis along x."""
    return make_pair(rb, k40, 1.28 / rb.k, (1.0, 0.0, 0.0))


@pytest.fixture(scope="session")
def iso_pair(rb, k40):
    return make_pair(rb, k40, 1.28 / rb.k, (1.0, 0.0, 0.0), orientation="isotropic")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
