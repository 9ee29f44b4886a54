import numpy as np
import pytest

# root of 1 = 0.25 (e^{-lam} - e^{-3 lam}) / lam, computed with mpmath findroot at 40 digits
LAMBDA_TRIVIAL_HALF = -0.33713741638654152935


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
