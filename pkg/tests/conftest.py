"""Shared pytest hooks.

After a run that included the acceptance tests, print one PASS/FAIL line
per top-level behavior criterion so the verdicts are visible at a glance.
"""


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    try:
        from test_acceptance import CRITERIA
    except ImportError:
        return
    outcomes = {}
    for status in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(status, []):
            if "test_acceptance.py" not in report.nodeid:
                continue
            name = report.nodeid.split("::")[-1].split("[")[0]
            if name not in CRITERIA:
                continue
            ok = outcomes.get(name, True) and status == "passed"
            outcomes[name] = ok
    if not outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for test_name, label in CRITERIA.items():
        if test_name in outcomes:
            verdict = "PASS" if outcomes[test_name] else "FAIL"
            terminalreporter.write_line(f"{verdict}  {label}")
        else:
            terminalreporter.write_line(f"SKIP  {label}")
