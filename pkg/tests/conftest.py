import numpy as np
import pytest

from pframe.measure import make_measure, mercedes_benz

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def mb():
    return mercedes_benz()


@pytest.fixture
def basis2():
    return make_measure([[1.0, 0.0], [0.0, 1.0]])


@pytest.fixture
def acceptance():
    """Record one line per acceptance criterion; echoed in the terminal summary."""

    def record(number: int, title: str, ok: bool, detail: str = "") -> None:
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
        print(line)
        ACCEPTANCE_LINES.append(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
