import pytest

ACCEPTANCE_RESULTS: dict[int, tuple[str, bool, str]] = {}


def record(number: int, name: str, ok: bool, detail: str = "") -> None:
    ACCEPTANCE_RESULTS[number] = (name, bool(ok), detail)
    print(_line(number))


def _line(number: int) -> str:
    name, ok, detail = ACCEPTANCE_RESULTS[number]
    return f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {name}" + (f" ({detail})" if detail else "")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(_line(number))


@pytest.fixture
def acceptance():
    return record
