import pytest

from kahler_eta.hirzebruch import closed_eta_pipeline
from kahler_eta.invariants import eta_report
from kahler_eta.reference import REFERENCE_CLOSED, reference_calibrations, reference_suite


@pytest.fixture(scope="session")
def calibrations():
    return reference_calibrations(50, 0)


@pytest.fixture(scope="session")
def reference_specs():
    return reference_suite(50, 0)


@pytest.fixture(scope="session")
def sphere_spec(reference_specs):
    return next(s for s in reference_specs if s.name == "sphere-base")


@pytest.fixture(scope="session")
def reference_reports(reference_specs):
    return {s.name: eta_report(s) for s in reference_specs}


@pytest.fixture(scope="session")
def closed_report():
    return closed_eta_pipeline(REFERENCE_CLOSED)


ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(n, ok, detail)``."""

    def record(number, ok, detail):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
