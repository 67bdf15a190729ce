import sys

import pytest

from mimoexp import ChannelSpec


@pytest.fixture
def iid33():
    return ChannelSpec.exponential(3, 3, 5, 15.0)


@pytest.fixture
def corr33():
    return ChannelSpec.exponential(3, 3, 5, 15.0, 0.5, 0.7)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
