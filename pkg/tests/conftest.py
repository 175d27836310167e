import re


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    results = {}
    for status in ("passed", "failed"):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" not in nodeid or report.when != "call":
                continue
            match = re.search(r"test_criterion_(\d+)_(\w+)", nodeid)
            if match:
                number = int(match.group(1))
                label = match.group(2).replace("_", " ")
                results[number] = (label, status.upper())
    if not results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number in sorted(results):
        label, status = results[number]
        terminalreporter.write_line(f"criterion {number} ({label}): {status}")
