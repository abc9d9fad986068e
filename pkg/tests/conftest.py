import math

import pytest

from cpmg_shotnoise.core import ResonatorQubitParams

KAPPA = 1 / 19.4e-9
CHI = math.pi * 5.7e6


@pytest.fixture
def fig2():
    """kappa = 1/(19.4 ns), 2 chi = 2 pi x 5.7 MHz."""
    return ResonatorQubitParams(KAPPA, CHI)


@pytest.fixture
def figs1():
    """kappa = 1/(19 ns), same dispersive shift."""
    return ResonatorQubitParams(1 / 19e-9, CHI)


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running numerical checks")


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per criterion; echoed now and in the terminal summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    def record(criterion: str, ok: bool, detail: str):
        line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
