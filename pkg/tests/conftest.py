import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "mhd",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
    derandomize=True,
)
settings.load_profile("mhd")


def pytest_configure(config):
    config._acceptance_lines = []
    config.addinivalue_line("markers", "acceptance: end-to-end acceptance criterion")


@pytest.fixture
def verdict(request, capsys):
    """``verdict(name, ok, detail)`` prints one PASS/FAIL line and asserts ``ok``."""

    def record(name, ok, detail=""):
        line = f"{name} {'PASS' if ok else 'FAIL'} {detail}".rstrip()
        request.config._acceptance_lines.append(line)
        with capsys.disabled():
            print(f"\n{line}")
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
