import re

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")


def pytest_terminal_summary(terminalreporter):
    """One pass/fail line per acceptance criterion."""
    rows = {}
    for reports in terminalreporter.stats.values():
        for rep in reports:
            nodeid = getattr(rep, "nodeid", "")
            m = _CRITERION.search(nodeid)
            if not m or getattr(rep, "when", None) != "call":
                continue
            detail = dict(getattr(rep, "user_properties", [])).get("detail", "")
            rows.setdefault(int(m.group(1)), []).append((rep.passed, detail))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(rows):
        status = "PASS" if all(ok for ok, _ in rows[n]) else "FAIL"
        detail = " | ".join(d for _, d in rows[n])
        terminalreporter.write_line(f"criterion {n}: {status}  {detail}")
