from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_t_angles(rng, low=0.05, high=0.6):
    return rng.uniform(low, high, 5)


def random_family6_angles(rng):
    while True:
        phi = rng.uniform(0.05, 1.0, 3)
        if phi.sum() < np.pi - 0.05:
            return phi


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for report in terminalreporter.stats.get(outcome, []):
            if report.when == "call" and "test_acceptance.py::test_criterion_" in report.nodeid:
                name = report.nodeid.split("::")[-1]
                lines.append(f"{'PASS' if outcome == 'passed' else 'FAIL'} {name}")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: s.split()[1]):
            terminalreporter.write_line(line)
