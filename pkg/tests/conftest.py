import numpy as np
import pytest

from adaptive_edit.toy import OracleBackbone, ScenarioSpec, make_scenario

# filled by test_acceptance; echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def scenario():
    spec = ScenarioSpec(channels=3, height=12, width=12, kind="region-recolor", region=(3, 3, 9, 9),
                        magnitude=1.5, instruction="change the hat to a red cap")
    return make_scenario(spec, seed=11)


@pytest.fixture
def oracle(scenario):
    return OracleBackbone(scenario, attention_seed=5)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
