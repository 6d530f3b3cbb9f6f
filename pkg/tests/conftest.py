"""Collects outcomes of tests marked ``acceptance(code, title)`` and prints one PASS/FAIL line per criterion."""

from __future__ import annotations

import pytest

_results: dict[str, dict] = {}


def _order(code: str) -> int:
    return int(code.lstrip("AC")) if code.lstrip("AC").isdigit() else 10**6


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    code, title = mark.args
    entry = _results.setdefault(code, {"title": title, "ok": True, "ran": False})
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        entry["ran"] = True
        if not rep.passed:
            entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for code in sorted(_results, key=_order):
        e = _results[code]
        status = "PASS" if e["ok"] and e["ran"] else "FAIL"
        tr.write_line(f"{code} {status} {e['title']}")
