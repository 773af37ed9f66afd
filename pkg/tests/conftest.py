"""Shared test configuration.

The acceptance suite (test_acceptance.py) names its tests test_criterion_N;
the terminal summary below prints one PASS/FAIL line per criterion so a run
log shows the gate status at a glance.
"""

import re

from hypothesis import settings

settings.register_profile("suite", deadline=None, derandomize=True)
settings.load_profile("suite")

_CRITERION = re.compile(r"test_criterion_(\d+)")
_acceptance = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    k = int(m.group(1))
    if report.when == "call":
        _acceptance[k] = _acceptance.get(k, True) and report.outcome == "passed"
    elif report.outcome not in ("passed", "skipped"):
        _acceptance[k] = False


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for k in sorted(_acceptance):
        verdict = "PASS" if _acceptance[k] else "FAIL"
        terminalreporter.write_line(f"ACCEPTANCE {k}: {verdict}")
