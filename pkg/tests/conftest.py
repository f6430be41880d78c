from pathlib import Path

import pytest

from maxdelay.textformat import load

DATA = Path(__file__).resolve().parents[1] / "src" / "maxdelay" / "data"


@pytest.fixture
def data_dir():
    return DATA


def example(name):
    return load(DATA / f"{name}.max")


ACCEPTANCE_LINES = []


def record_criterion(number, passed, detail):
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
