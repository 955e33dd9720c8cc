from __future__ import annotations

import pytest

# criterion id -> list of (part, outcome, detail); filled by the acceptance tests
CRITERIA: dict[str, list[tuple[str, str, str]]] = {}


@pytest.fixture
def criterion(request):
    """Record the outcome of one acceptance criterion (or one part of it)."""
    marker = request.node.get_closest_marker("criterion")
    cid, part = marker.args[0], marker.kwargs.get("part", "")
    box = {"detail": ""}
    yield box
    rep = getattr(request.node, "rep_call", None)
    if rep is None:
        outcome = "ERROR"
    elif rep.passed:
        outcome = "PASS" if not hasattr(rep, "wasxfail") else "PASS (unexpected)"
    elif hasattr(rep, "wasxfail"):
        outcome = "FAIL (expected)"
    else:
        outcome = "FAIL"
    CRITERIA.setdefault(cid, []).append((part, outcome, box["detail"]))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    out = yield
    rep = out.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, part=''): acceptance criterion recorded in the summary")


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(CRITERIA, key=int):
        for part, outcome, detail in CRITERIA[cid]:
            label = f"criterion {cid}" + (f" [{part}]" if part else "")
            terminalreporter.write_line(f"{label}: {outcome}" + (f"  {detail}" if detail else ""))
