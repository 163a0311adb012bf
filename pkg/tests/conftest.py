import re

_CRITERIA = {
    1: "Euler exactness",
    2: "linear closed-form oracle",
    3: "analytic branch",
    4: "derivative law",
    5: "Q at the crossing",
    6: "branch atlas",
    7: "decay of the rescaled tail",
    8: "Borel-plane consistency",
    9: "appendix constants",
    10: "Borel-Pade summation",
}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcome = {}
    for key in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", getattr(rep, "nodeid", ""))
            if not m or rep.when not in ("call", "setup"):
                continue
            n = int(m.group(1))
            ok = key == "passed"
            outcome[n] = outcome.get(n, True) and ok
    if not outcome:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        if n in outcome:
            status = "PASS" if outcome[n] else "FAIL"
        else:
            status = "NOT RUN"
        terminalreporter.write_line(f"criterion {n:2d} ({_CRITERIA[n]}): {status}")

