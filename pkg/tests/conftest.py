"""Shared test configuration: benchmark parameter fixtures and the
acceptance-verdict report that is echoed after the run summary."""

import math

import pytest

try:
    from hypothesis import settings

    settings.register_profile("suite", deadline=None, max_examples=50)
    settings.load_profile("suite")
except ImportError:  # pragma: no cover - hypothesis is an optional dev dependency
    pass

from qou_caplets import QouParams

_VERDICTS: list[str] = []


def pytest_configure(config):
    _VERDICTS.clear()


@pytest.fixture(scope="session")
def params_a() -> QouParams:
    """Benchmark set A: mean-reverting factor with kappa=0.9, theta=0.25/0.9,
    delta=0.2, q=0, started at y0=sqrt(0.08)."""
    return QouParams(kappa=0.9, theta=0.25 / 0.9, delta=0.2, q=0.0, y0=math.sqrt(0.08))


@pytest.fixture(scope="session")
def params_cir() -> QouParams:
    """Benchmark set CIR: theta=0 makes the squared factor a CIR-type
    short rate; kappa=0.045, delta=sqrt(0.035), q=0, y0=sqrt(0.08)."""
    return QouParams(
        kappa=0.045, theta=0.0, delta=math.sqrt(0.035), q=0.0, y0=math.sqrt(0.08)
    )


def record_verdict(line: str) -> None:
    """Collect a PASS/FAIL verdict line for the end-of-run report."""
    _VERDICTS.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance verdicts")
    for line in _VERDICTS:
        terminalreporter.write_line(line)
