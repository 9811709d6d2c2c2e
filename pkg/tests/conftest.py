import numpy as np
import pytest

from qcorr.discord import OptimizerConfig

_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def fast_cfg():
    """Fewer restarts for tests that only need a rough optimum on easy states."""
    return OptimizerConfig(restarts=8, seed=0)


@pytest.fixture(scope="session")
def acceptance(request):
    """Record one verdict line per acceptance criterion, then assert it."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(number: int, title: str, passed: bool, detail: str) -> None:
        lines.append((number, f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}: {detail}"))
        assert passed, detail

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
