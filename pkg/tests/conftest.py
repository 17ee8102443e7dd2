from __future__ import annotations

import pytest
from hypothesis import settings

# single-core sandboxes make per-example timing noisy
settings.register_profile("tglab", deadline=None)
settings.load_profile("tglab")


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def record(request):
    """Log one PASS/FAIL line for an acceptance criterion and echo it."""

    def _record(number: int, ok: bool, text: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {text}"
        request.config._acceptance_lines.append((number, line))
        print(line)

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines):
        terminalreporter.write_line(line)
