import functools
import os

import pytest

from carmichael.search import SearchConfig, enumerate_carmichael

from oracles import brute_carmichael

STRETCH = os.environ.get("CARMICHAEL_STRETCH") == "1"

_criteria: list[tuple[str, bool, str]] = []


@functools.lru_cache(maxsize=None)
def run(bound: int, **kw):
    return enumerate_carmichael(SearchConfig(bound, **kw))


@functools.lru_cache(maxsize=None)
def brute(bound: int) -> tuple[int, ...]:
    return tuple(brute_carmichael(bound))


@pytest.fixture(scope="session")
def upto_1e7():
    return run(10**7)


@pytest.fixture(scope="session")
def upto_1e8():
    return run(10**8)


@pytest.fixture(scope="session")
def upto_1e10():
    return run(10**10)


@pytest.fixture(scope="session")
def criterion():
    """Record an acceptance criterion outcome; summarised at the end of the run."""

    def record(name: str, ok: bool, detail: str = "") -> None:
        _criteria.append((name, ok, detail))
        assert ok, f"{name}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _criteria:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
