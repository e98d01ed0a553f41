import time
from importlib import resources

import pytest

from allatonce import Evidence, NodesSame
from allatonce import scenarios


@pytest.fixture
def fig2a():
    return scenarios.fig2a().geometry


@pytest.fixture
def fig2b():
    return scenarios.fig2b().geometry


@pytest.fixture
def bottom_h():
    return Evidence.of(bottom="H")


@pytest.fixture
def same_lr():
    return NodesSame("left", "right")


@pytest.fixture
def models_dir():
    return resources.files("allatonce").joinpath("models")


@pytest.fixture(autouse=True)
def _no_guard_override(monkeypatch):
    monkeypatch.delenv("AAO_SIZE_GUARD", raising=False)


# acceptance criteria report: (number, title, passed, seconds)
ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    return _record


class _record:
    def __init__(self, number, title):
        self.number, self.title = number, title

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        line = f"criterion {self.number:2d} {'PASS' if exc_type is None else 'FAIL'}  {self.title} ({elapsed:.2f}s)"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return False


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
