import pytest

from trimodal.kernel_finder import attach_third_mode

ACCEPTANCE_LINES: dict = {}


def record_acceptance(number: int, passed: bool, detail: str):
    status = "PASS" if passed else "FAIL"
    ACCEPTANCE_LINES[number] = f"criterion {number}: {status}  {detail}"


@pytest.fixture(scope="session")
def spec_6_10_15():
    return attach_third_mode(6, 10, 15)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
