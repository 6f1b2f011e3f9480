"""Shared pytest wiring: the acceptance suite registers one result line
per criterion here so the run always ends with a readable scoreboard."""

ACCEPTANCE_RESULTS = []


def record_criterion(number, name, passed, detail=""):
    status = "PASS" if passed else "FAIL"
    line = f"[criterion {number:>3}] {name}: {status}"
    if detail:
        line += f" ({detail})"
    ACCEPTANCE_RESULTS.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)
