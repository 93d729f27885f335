import pytest
from hypothesis import HealthCheck, settings

from hlwalk.root_system import build_root_system

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def systems():
    return {
        "A1": build_root_system({"family": "A", "rank": 1}),
        "A2": build_root_system({"family": "A", "rank": 2}),
        "C2": build_root_system({"family": "C", "rank": 2}),
        "G2": build_root_system({"family": "G", "rank": 2}),
    }


@pytest.fixture
def acceptance_line():
    def record(number: int, ok: bool, detail: str):
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        print(ACCEPTANCE_LINES[-1])
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
