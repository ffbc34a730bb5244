"""Shared test plumbing: the acceptance-criterion recorder and its summary."""
import contextlib
from time import perf_counter

import pytest

#: num -> (name, passed, detail), filled by the `criterion` context manager.
ACCEPTANCE_RESULTS = {}


class _Criterion:
    """Accumulates sub-check outcomes for one acceptance criterion."""

    def __init__(self, num: int, name: str):
        self.num = num
        self.name = name
        self.failures = []
        self.notes = []

    def check(self, ok: bool, label: str) -> bool:
        (self.notes if ok else self.failures).append(label)
        return ok


@contextlib.contextmanager
def criterion(num: int, name: str, budget_s: float):
    """Record one acceptance criterion; fails the test iff any check failed.

    The wall-clock budget is itself a sub-check.  Results land in
    ACCEPTANCE_RESULTS so the terminal summary can print one line per
    criterion even when the enclosing test fails.
    """
    c = _Criterion(num, name)
    t0 = perf_counter()
    try:
        yield c
    except Exception as e:
        c.failures.append(f"error: {type(e).__name__}: {e}")
        ACCEPTANCE_RESULTS[num] = (name, False, "; ".join(c.failures))
        raise
    elapsed = perf_counter() - t0
    c.check(elapsed < budget_s, f"runtime {elapsed:.2f}s (budget {budget_s:g}s)")
    shown = c.failures if c.failures else c.notes
    ACCEPTANCE_RESULTS[num] = (name, not c.failures, "; ".join(shown))
    if c.failures:
        pytest.fail(f"criterion {num} ({name}): " + "; ".join(c.failures))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_RESULTS):
        name, passed, detail = ACCEPTANCE_RESULTS[num]
        status = "PASS" if passed else "FAIL"
        suffix = f"  [{detail}]" if detail else ""
        terminalreporter.write_line(f"ACCEPTANCE {num:02d} {name}: {status}{suffix}")
