import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wassrom.measure import DiscreteMeasure, QuantileGrid, SpatialGrid, cdf_to_icdf  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def uniform_icdf(a, b, qgrid=None):
    q = qgrid or QuantileGrid()
    grid = SpatialGrid(-1.0, 4.0, 2000)
    d = ((grid.centers > a) & (grid.centers < b)).astype(float)
    return cdf_to_icdf(DiscreteMeasure.from_density(grid, d), q)


def random_measure(rng, grid, zero_frac=0.0):
    d = rng.random(grid.n_cells) + 0.05
    if zero_frac:
        d *= rng.random(grid.n_cells) >= zero_frac
        d[rng.integers(grid.n_cells)] += 1.0
    return DiscreteMeasure.from_density(grid, d)


CRITERIA = []


def record(number, ok, detail):
    """Log one acceptance criterion; printed again in the terminal summary."""
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    CRITERIA.append((number, line))
    print("\n" + line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(CRITERIA):
        terminalreporter.write_line(line)
