"""Shared fixtures: numba warm-up and per-criterion result lines."""

import numpy as np
import pytest

from solpot.raster import GridSpec, Raster
from solpot.sun import SolarConfig, daily_irradiation


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the shadow-march kernels once so timed tests measure compute only."""
    tiny = Raster(GridSpec(4, 4, 0, 0, 0.5), np.full((4, 4), 1.0))
    daily_irradiation(tiny, SolarConfig(latitude=35.78, day_of_year=172, time_step=4.0))


def pytest_runtest_logreport(report):
    # one pass/fail line per acceptance criterion, independent of capture
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        status = "PASS" if report.passed else "FAIL"
        print(f"\n[{status}] {name}", flush=True)
