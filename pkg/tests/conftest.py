import time

import pytest

_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_KEY] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line: call with (number, label), then run the body."""
    log = request.config.stash[_KEY]
    state = {}

    def start(number, label, limit=None):
        state.update(number=number, label=label, limit=limit, t0=time.perf_counter())

    yield start
    if not state:
        return
    elapsed = time.perf_counter() - state["t0"]
    rep = getattr(request.node, "rep_call", None)
    passed = rep is not None and rep.passed
    limit = f" (limit {state['limit']} s)" if state["limit"] else ""
    log.append(f"criterion {state['number']}: {'PASS' if passed else 'FAIL'} - {state['label']} [{elapsed:.2f} s{limit}]")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash[_KEY]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
