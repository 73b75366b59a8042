from dataclasses import replace
from importlib import resources

import pytest

from crowdlease.io import load_scenario


def data_path(name):
    return resources.files("crowdlease") / "data" / name


def load_s0():
    return load_scenario(data_path("s0.json"))


@pytest.fixture
def s0():
    return load_s0()


@pytest.fixture
def world7():
    return load_scenario(data_path("world7.json"))


def with_streams(s, region, n):
    bundles = [replace(b, stream_count=n) if b.region == region else b for b in s.bundles]
    return replace(s, bundles=tuple(bundles))


def with_prefs(s, region, **prefs):
    table = {r: dict(row) for r, row in s.preferences.items()}
    table[region].update(prefs)
    return replace(s, preferences=table)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
