import pytest

# criterion number -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE: dict = {}


def record(criterion: int, passed: bool, detail: str = "") -> None:
    ACCEPTANCE[criterion] = (passed, detail)
    print(f"criterion {criterion}: {'PASS' if passed else 'FAIL'} {detail}".rstrip())


@pytest.fixture
def wal_path(tmp_path):
    return tmp_path / "store.wal"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        verdict = "PASS" if passed else "FAIL"
        if detail.split(":", 1)[0] in ("NOT-REPRODUCIBLE", "PARTIAL"):
            verdict = detail.split(":", 1)[0]
            detail = detail.split(":", 1)[1].strip()
        terminalreporter.write_line(f"criterion {number:>2}: {verdict:<16} {detail}")
