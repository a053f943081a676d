import time

ACCEPTANCE: list = []
_START = time.perf_counter()


def record(criterion: str, ok: bool, detail: str) -> None:
    ACCEPTANCE.append((criterion, ok, detail))
    print(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for name, ok, detail in sorted(ACCEPTANCE):
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    elapsed = time.perf_counter() - _START
    tr.write_line(f"{'PASS' if elapsed < 120 else 'FAIL'}  suite runtime {elapsed:.1f} s (limit 120 s)")
