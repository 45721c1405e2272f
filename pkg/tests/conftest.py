from __future__ import annotations

import pytest

from orthomeasure import io

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def space():
    return io.parse_space(io.read_json(io.bundled_path("space")))


@pytest.fixture(scope="session")
def registry(space):
    return io.parse_registry(io.read_json(io.bundled_path("registry")), space)


@pytest.fixture(scope="session")
def measures(space):
    return {name: io.parse_measure(io.read_json(io.bundled_path(name)), space) for name in ("state", "frame_abs_nz", "table")}


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
