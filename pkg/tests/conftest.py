import hypothesis
import numpy as np
import pytest

from swipt.config import SystemConfig, reference_config

hypothesis.settings.register_profile("default", max_examples=40, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def small_cfg():
    return SystemConfig(
        n_subchannels=8, cp_length=3, total_power=100.0,
        delay_spread_bob=3, delay_spread_eve=3,
    )


@pytest.fixture(scope="session")
def reference_cfg():
    return reference_config()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
