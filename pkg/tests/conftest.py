from __future__ import annotations

_ACCEPTANCE: dict[str, list[bool]] = {}
_LABELS: dict[str, str] = {}


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    # a failing fixture never reaches the call phase, so count it here
    if call.when != "call" and not (call.when == "setup" and call.excinfo is not None):
        return
    key, label = mark.args
    _LABELS[key] = label
    _ACCEPTANCE.setdefault(key, []).append(call.excinfo is None)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: (len(k), k)):
        verdict = "PASS" if all(_ACCEPTANCE[key]) else "FAIL"
        terminalreporter.write_line(f"[{verdict}] {key}: {_LABELS[key]}")
