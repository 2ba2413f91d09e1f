import pytest

_CRITERIA: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion():
    """Record one acceptance line; the summary is printed after the run."""

    def record(label: str, ok: bool, detail: str = "") -> bool:
        _CRITERIA.append((label, bool(ok), detail))
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in sorted(_CRITERIA, key=lambda item: _order(item[0])):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")


def _order(label: str):
    head = label.split()[1] if label.startswith("criterion") else label
    try:
        return (int(head.rstrip(":")), label)
    except ValueError:
        return (99, label)
