import pytest


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def verdict(request):
    """``verdict(label, ok, detail)`` prints one PASS/FAIL line and asserts ``ok``."""
    def report(label, ok, detail):
        line = f"criterion {label}: {'PASS' if ok else 'FAIL'} | {detail}"
        print(line)
        request.config._acceptance_lines.append(line)
        assert ok, line
    return report


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: s.split(":")[0]):
            terminalreporter.write_line(line)
