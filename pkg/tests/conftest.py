"""Shared fixtures: per-criterion PASS/FAIL reporting for the acceptance suite."""

import pytest

_LINES = []


@pytest.fixture
def criterion():
    """Record one acceptance-criterion verdict and assert it.

    Prints the line immediately and repeats it in the terminal summary so a
    plain `pytest -v` shows one line per criterion.
    """
    def record(name: str, ok: bool, detail: str = ""):
        line = f"{name}: {'PASS' if ok else 'FAIL'}" + (f" ({detail})" if detail else "")
        _LINES.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
