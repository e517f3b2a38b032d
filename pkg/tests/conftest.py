import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "repo", deadline=None, derandomize=True, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


ACCEPTANCE: dict = {}


@pytest.fixture
def criterion(request):
    """Record named checks for one acceptance criterion.

    ``check(label, value, ok)`` stores the measurement; the summary prints
    one line per criterion after the run.
    """
    number = request.node.get_closest_marker("criterion").args[0]
    rows = ACCEPTANCE.setdefault(number, [])

    def check(label, value, ok):
        rows.append((label, value, bool(ok)))
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {label}: {value}"
        print(line)
        return bool(ok)

    return check


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        rows = ACCEPTANCE[number]
        ok = all(r[2] for r in rows)
        failed = [r[0] for r in rows if not r[2]]
        tail = f" (failing: {'; '.join(failed)})" if failed else ""
        tr.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {len(rows)} checks{tail}")
        for label, value, good in rows:
            tr.write_line(f"    [{'ok' if good else 'XX'}] {label}: {value}")
