import mpmath
import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(autouse=True)
def _mp_precision():
    with mpmath.workdps(30):
        yield


@pytest.fixture
def acceptance_line(capsys):
    """Record and print the one-line verdict of an acceptance criterion."""

    def emit(number: int, ok: bool, detail: str):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)

    return emit


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
