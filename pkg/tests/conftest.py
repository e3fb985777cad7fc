import math
from pathlib import Path

import pytest

from circleskew import GOLDEN, IfsFamily, Word, rotation, sine_map
from circleskew.config import RunConfig
from circleskew.covers import find_expanding_cover
from circleskew.skew import certified_attracting_orbit

ROOT = Path(__file__).resolve().parents[1]
DEMO_CONFIG = ROOT / "demos" / "demo.yaml"

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def fam():
    return IfsFamily([rotation(GOLDEN), sine_map(0.0, 1.0 / (4.0 * math.pi))])


@pytest.fixture(scope="session")
def rotations():
    return IfsFamily([rotation(0.1), rotation(GOLDEN)])


@pytest.fixture(scope="session")
def seed(fam):
    return certified_attracting_orbit(fam, Word([2]), 0.5)


@pytest.fixture(scope="session")
def cover(fam):
    return find_expanding_cover(fam, 1.1, 40)


@pytest.fixture(scope="session")
def demo_config():
    return RunConfig.from_file(DEMO_CONFIG)


@pytest.fixture(scope="session")
def demo_run(demo_config):
    from circleskew.construction import run_sequence
    return run_sequence(demo_config)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
