import os

ACCEPTANCE: dict[int, str] = {}

SLOW = os.environ.get("CRYSRED_SLOW") == "1"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
