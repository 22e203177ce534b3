import pytest

ACCEPTANCE_LINES = []


@pytest.fixture(autouse=True)
def _no_output_env(monkeypatch):
    monkeypatch.delenv("EVALFRL_OUT", raising=False)


@pytest.fixture
def acceptance_line():
    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
