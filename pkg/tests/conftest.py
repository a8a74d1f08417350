import numpy as np
import pytest

from blinklab.series import EarSeries

# filled by test_acceptance.report(); echoed after capture ends so the
# per-criterion lines always reach the terminal and any tee'd log
acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture
def make_series():
    def build(values, valid=None, fps=240.0, eye="left"):
        values = np.asarray(values, dtype=np.float64)
        if valid is None:
            valid = np.isfinite(values)
        return EarSeries(values=values, valid=np.asarray(valid, bool), fps=fps, eye=eye)

    return build


def dip_series(n, dips, baseline=0.3, fps=240.0, eye="left"):
    """A flat series with Gaussian dips planted at (apex, depth, half_width)."""
    values = np.full(n, baseline)
    frames = np.arange(n, dtype=np.float64)
    for apex, depth, half_width in dips:
        values -= depth * np.exp(-0.5 * ((frames - apex) / half_width) ** 2)
    return EarSeries(values=values, valid=np.ones(n, bool), fps=fps, eye=eye)


@pytest.fixture
def make_dip_series():
    return dip_series
