import pytest

from nonlocal_blowup.cli import execute
from nonlocal_blowup.config import get_preset

_VERDICTS: dict[int, tuple[bool, str]] = {}


class PresetRuns:
    """Runs each preset at most once per session."""

    def __init__(self):
        self._cache = {}

    def __getitem__(self, name):
        if name not in self._cache:
            self._cache[name] = execute(get_preset(name))[1]
        return self._cache[name]


@pytest.fixture(scope="session")
def preset_runs():
    return PresetRuns()


@pytest.fixture
def verdict():
    def record(number, ok, detail=""):
        _VERDICTS[number] = (bool(ok), detail)
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_VERDICTS):
        ok, detail = _VERDICTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
