import time
from collections import defaultdict

import pytest

from lieopt.fixtures import builtin_algebra

_ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture(scope="session")
def heat():
    return builtin_algebra("heat6")


@pytest.fixture(scope="session")
def ns():
    return builtin_algebra("ns4")


class Recorder:
    """Collects one line per acceptance criterion; a criterion may have several parts."""

    def __init__(self, store: dict):
        self.store = store

    def part(self, criterion: int, ok: bool, detail: str, seconds: float | None = None):
        timing = f" [{seconds:.2f} s]" if seconds is not None else ""
        self.store[criterion].append((ok, detail + timing))


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


@pytest.fixture(scope="session")
def record(request):
    store = request.config.stash.setdefault(_ACCEPTANCE, defaultdict(list))
    return Recorder(store)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_ACCEPTANCE, None)
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(store):
        parts = store[criterion]
        verdict = "PASS" if all(ok for ok, _ in parts) else "NOT MET"
        detail = "; ".join(("" if ok else "FAILED: ") + d for ok, d in parts)
        terminalreporter.write_line(f"criterion {criterion:2d}: {verdict} - {detail}")
