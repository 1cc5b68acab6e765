import sys
from collections import OrderedDict
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

CRITERIA = OrderedDict([
    (1, "dimension formula for N = 2..6, l = 0..20"),
    (2, "first 10 roots for N in {2, 3}, l = 0..10 to 1e-10, under 5 s cold"),
    (3, "spectrum identity and Morse index on 50 random instances"),
    (4, "worked examples 1 to 5 reproduced"),
    (5, "Euler ring coherence and index-change witness agreement"),
    (6, "disk verification of the radial family f(s) = (s-1)^2/8"),
    (7, "gradient and Hessian finite-difference fidelity"),
    (8, "byte-identical verify output across runs and thread counts"),
])

_outcomes: dict[int, list[bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): test contributes to acceptance criterion n")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if call.when == "call" or (call.when == "setup" and call.excinfo is not None):
        _outcomes.setdefault(marker.args[0], []).append(call.excinfo is None)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n, title in CRITERIA.items():
        results = _outcomes.get(n)
        if results is None:
            status = "NOT RUN"
        else:
            status = "PASS" if all(results) else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {status} - {title}")
