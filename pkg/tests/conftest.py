"""Shared pytest configuration: acceptance result summary."""

ACCEPTANCE_RESULTS: list[tuple[str, str, str]] = []


def record_acceptance(criterion: str, status: str, detail: str = "") -> None:
    ACCEPTANCE_RESULTS.append((criterion, status, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    order = sorted(set(c for c, _, _ in ACCEPTANCE_RESULTS))
    for criterion in order:
        parts = [(s, d) for c, s, d in ACCEPTANCE_RESULTS if c == criterion]
        status = "PASS" if all(s == "PASS" for s, _ in parts) else "FAIL"
        details = "; ".join(d for _, d in parts if d)
        terminalreporter.write_line(f"{criterion}: {status}  {details}")
