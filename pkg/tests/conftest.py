import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_RESULTS: dict[int, tuple[bool, str]] = {}
_ACCEPTANCE_RAN = []


@pytest.fixture
def criterion(request):
    """``criterion(k, passed, detail)`` records one acceptance line for the summary."""
    _ACCEPTANCE_RAN.append(request.node.name)

    def record(k: int, passed: bool, detail: str) -> bool:
        _RESULTS[k] = (bool(passed), detail)
        print(f"CRITERION {k}: {'PASS' if passed else 'FAIL'} {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RAN:
        return
    terminalreporter.section("acceptance criteria")
    for k in range(1, 12):
        if k in _RESULTS:
            ok, detail = _RESULTS[k]
            terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
        else:
            terminalreporter.write_line(f"criterion {k:2d}: NOT RUN")
