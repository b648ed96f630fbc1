"""Shared pytest hooks: visible per-criterion lines for the acceptance suite.

Default capture swallows in-test prints, so the acceptance outcomes are
replayed through the terminal reporter after the run, one line each.
"""
from __future__ import annotations

_CRITERIA: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "acceptance_criterion(name): release criterion reprinted after the run",
    )


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("acceptance_criterion")
        if mark is not None:
            _CRITERIA[item.nodeid] = mark.args[0]


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    outcomes: dict[str, str] = {}
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, ()):
            nodeid = getattr(report, "nodeid", None)
            if nodeid in _CRITERIA and getattr(report, "when", "call") == "call":
                outcomes[nodeid] = status
    terminalreporter.section("acceptance criteria")
    for nodeid, name in _CRITERIA.items():
        status = outcomes.get(nodeid)
        label = "[PASS]" if status == "passed" else "[FAIL]"
        if status is None:
            label = "[SKIP]"
        terminalreporter.write_line(f"{label} {name}")
