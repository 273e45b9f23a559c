import numpy as np
import pytest

from ris_mec.channel import ChannelRealization

# lines reported by the acceptance suite, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def cn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_channel(rng, M=3, N=4, K=2):
    return ChannelRealization(cn(rng, M, K), cn(rng, N, K), cn(rng, M, N))
