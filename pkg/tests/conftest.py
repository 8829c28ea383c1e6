ACCEPTANCE = []


def record(label, passed, detail=""):
    """Store one acceptance line for the terminal summary and return ``passed``."""
    line = f"{'PASS' if passed else 'FAIL'} {label}" + (f" ({detail})" if detail else "")
    ACCEPTANCE.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
