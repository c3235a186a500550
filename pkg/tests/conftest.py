import math

import pytest

from constellation_access.access import MissionConfig
from constellation_access.astro import Timestamp

EPOCH = Timestamp.from_iso("2022-05-11T00:00:00Z")

_criteria: dict[str, tuple[str, list[str]]] = {}


@pytest.fixture
def epoch():
    return EPOCH


@pytest.fixture
def day_mission():
    return MissionConfig(EPOCH, 86400.0, 10.0, 0.01)


def deg(x):
    return math.radians(x)


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    number, title = marker
    entry = _criteria.setdefault(number, (title, []))
    if report.when == "call" or report.outcome != "passed":
        entry[1].append(report.outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is not None:
        report.criterion = (mark.args[0], mark.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria, key=int):
        title, outcomes = _criteria[number]
        ok = outcomes and all(o == "passed" for o in outcomes)
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}")
