import numpy as np
import pytest

from memwalk import kernels

ACCEPTANCE = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=sorted(kernels.available()))
def backend(request):
    return kernels.get(request.param)


@pytest.fixture
def report():
    """Record one acceptance line: ``report(criterion, ok, detail)``."""

    def _record(name, ok, detail):
        ACCEPTANCE.append((name, bool(ok), detail))
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
