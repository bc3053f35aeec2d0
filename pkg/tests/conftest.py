import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("fixed", derandomize=True, max_examples=60, deadline=None)
settings.load_profile("fixed")


@pytest.fixture(scope="session")
def frozen():
    return json.loads(Path(__file__).with_name("frozen_values.json").read_text())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = mod.pytest_terminal_summary_lines() if mod else []
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
