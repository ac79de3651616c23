import sys


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(results):
        ok, title, detail = results[cid]
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  C{cid}  {title}  |  {detail}")
