import sys

import numpy as np
import pytest

from heisenberg_sr.group import MetricSpec
from heisenberg_sr.hamiltonians import SystemId


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


def make_system(kind, n, C=0.7, tau=1.0):
    """A representative system: distinct sigmas for LL, the standard metric for LR."""
    if kind.startswith("ll"):
        spec = MetricSpec(tuple([3.0, 2.0, 1.0][-n:]), tau)
    else:
        spec = MetricSpec.standard(n, tau)
    return SystemId(kind, n, spec, C)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
