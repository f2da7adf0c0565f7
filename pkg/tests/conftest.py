import time

import pytest

ACCEPTANCE_LINES: list[str] = []


class Criterion:
    """Times one acceptance check and records a PASS/FAIL line."""

    def __init__(self, number: int, limit_s: float):
        self.number = number
        self.limit = limit_s
        self.t0 = time.perf_counter()

    def finish(self, ok: bool, detail: str) -> bool:
        elapsed = time.perf_counter() - self.t0
        ok = bool(ok) and elapsed < self.limit
        line = f"{'PASS' if ok else 'FAIL'} criterion {self.number}: {detail} [{elapsed:.1f}s < {self.limit:g}s]"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
