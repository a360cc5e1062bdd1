import numpy as np
import pytest

from jitlgpr import synth


@pytest.fixture(scope="session")
def seed42_pair():
    """Seed-42 synthetic pair: 9 training years plus 19 test months."""
    return synth.generate(synth.SynthConfig(extra_months=19, seed=42))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
