import pytest

from tfwarp.experiments import PRESETS, waveform

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def warped_cfg():
    return waveform(PRESETS["warped"], 1)


@pytest.fixture(scope="session")
def warped_cfg_l4():
    return waveform(PRESETS["warped"], 4)


@pytest.fixture(scope="session")
def baseline_cfg():
    return waveform(PRESETS["wofdm-baseline"], 1)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
