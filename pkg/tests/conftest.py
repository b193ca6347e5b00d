import sys

import numpy as np
import pytest


@pytest.fixture
def rng(request):
    # One stream per test, stable across runs and test ordering.
    seed = sum(ord(c) for c in request.node.nodeid) % (2**32)
    return np.random.default_rng(seed)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.format_result(number))
