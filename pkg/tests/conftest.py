import json
import pathlib

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from missml.model import SuffStats

settings.register_profile("repo", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

DATA = pathlib.Path(__file__).parent / "data"


def load_stats(name: str) -> SuffStats:
    return SuffStats.from_dict(json.loads((DATA / f"{name}.json").read_text()))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def generic_stats():
    return SuffStats(n=40, r=12, s=15, my1=0.3, my2=-0.2, my11=1.4, my12=0.5, my22=1.1,
                     mz1=0.1, mz2=1.2, mw1=-0.4, mw2=0.9)


# one "PASS/FAIL criterion k: ..." line per acceptance criterion, shown in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
