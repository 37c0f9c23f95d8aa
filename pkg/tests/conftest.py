import time

import pytest
from hypothesis import HealthCheck, settings

from sparse_arith.sequences import builtin

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

SUITE_BUDGET_SECONDS = 300
ACCEPTANCE: dict[str, tuple[bool, str]] = {}
_START = time.monotonic()


def record(name: str, ok: bool, detail: str = ""):
    """Remember an acceptance verdict; printed once the session ends."""
    ACCEPTANCE[name] = (ok, detail)


@pytest.fixture(scope="session")
def pow2():
    return builtin("pow2")


@pytest.fixture(scope="session")
def fib():
    return builtin("fibonacci")


@pytest.fixture(scope="session")
def fact():
    return builtin("factorials")


@pytest.fixture(scope="session")
def ident():
    return builtin("identity")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    elapsed = time.monotonic() - _START
    tr = terminalreporter
    tr.section("acceptance criteria")
    for name, (ok, detail) in ACCEPTANCE.items():
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    if len(ACCEPTANCE) > 1:
        ok = elapsed < SUITE_BUDGET_SECONDS
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  suite runtime: {elapsed:.1f} s "
                      f"(budget {SUITE_BUDGET_SECONDS} s)")
