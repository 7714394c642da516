import numpy as np
import pytest

from evpos.spectral import Operator

# label -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict = {}


@pytest.fixture
def record():
    def _record(label: str, passed: bool, detail: str = "") -> None:
        ACCEPTANCE[label] = (bool(passed), detail)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, (ok, detail) in ACCEPTANCE.items():
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")


@pytest.fixture
def diag01():
    return Operator(np.diag([0.0, -1.0]), name="diag01")


@pytest.fixture
def rotation():
    return Operator(np.array([[0.0, -1.0], [1.0, 0.0]]), name="rotation")
