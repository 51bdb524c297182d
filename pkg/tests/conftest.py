from pathlib import Path

import pytest

from fuzzyprolog.syntax import parse_program

PROGRAMS = Path(__file__).resolve().parent.parent / "programs"


def load(name: str):
    return parse_program((PROGRAMS / name).read_text())


@pytest.fixture(scope="session")
def teenager():
    return load("teenager.fpl")


@pytest.fixture(scope="session")
def players():
    return load("players.fpl")


@pytest.fixture(scope="session")
def timetable():
    return load("timetable.fpl")


# -- acceptance criteria report -----------------------------------------------------

_criteria: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or (report.when != "call" and report.passed):
        return
    number, title = marker.args
    entry = _criteria.setdefault(number, {"title": title, "ok": True, "detail": ""})
    if report.failed or report.skipped:
        entry["ok"] = False
        entry["detail"] = report.longrepr.reprcrash.message.splitlines()[0] \
            if hasattr(report.longrepr, "reprcrash") else report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        status = "PASS" if entry["ok"] else "FAIL"
        line = f"criterion {number}: {status}  {entry['title']}"
        if not entry["ok"] and entry["detail"]:
            line += f"  ({entry['detail']})"
        terminalreporter.write_line(line)
