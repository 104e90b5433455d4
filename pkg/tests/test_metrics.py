import numpy as np
import pytest

from oracles import hminus1_sine_series
from wassrom.errors import IncompatibleGridError
from wassrom.measure import DiscreteMeasure, SpatialGrid
from wassrom.metrics import FemMesh, hminus1_error, hminus1_norm, l2_error, resample


def _sine(n_cells, k=1):
    g = SpatialGrid(0.0, 1.0, n_cells)
    e = g.edges
    # exact cell averages of sin(k pi x)
    f = (np.cos(k * np.pi * e[:-1]) - np.cos(k * np.pi * e[1:])) / (k * np.pi * g.dx)
    return g, f


def test_sine_series_oracle_matches_closed_form():
    assert hminus1_sine_series(lambda x: np.sin(np.pi * x), n_terms=5) == pytest.approx(
        1 / (np.pi * np.sqrt(2)), rel=1e-6)


def test_hminus1_of_sine():
    g, f = _sine(4000)
    exact = 1 / (np.pi * np.sqrt(2))
    gaps = []
    for h in (4e-3, 2e-3, 1e-3):
        v = hminus1_norm(g, f, FemMesh(0.0, 1.0, h))
        gaps.append(abs(v - exact))
        if h == 1e-3:
            assert v == pytest.approx(exact, rel=0.01)
    assert gaps[0] > gaps[1] > gaps[2]


def test_hminus1_of_higher_mode_and_zero():
    g, f = _sine(4000, k=3)
    assert hminus1_norm(g, f) == pytest.approx(1 / (3 * np.pi * np.sqrt(2)), rel=0.01)
    assert hminus1_norm(g, np.zeros(4000)) == 0


def test_hminus1_of_step_against_series():
    g = SpatialGrid(0.0, 1.0, 1000)
    f = np.where(g.centers < 0.3, 1.0, -0.5)
    ref = hminus1_sine_series(lambda x: np.where(x < 0.3, 1.0, -0.5), n_terms=400)
    assert hminus1_norm(g, f) == pytest.approx(ref, rel=1e-3)


def test_l2_indicators():
    g = SpatialGrid(-1.0, 3.0, 400)
    a = DiscreteMeasure.from_density(g, ((g.centers > 0) & (g.centers < 1)).astype(float))
    b = DiscreteMeasure.from_density(g, ((g.centers > 0.5) & (g.centers < 1.5)).astype(float))
    assert l2_error(a, b) == pytest.approx(1.0)
    assert l2_error(a, a) == 0


def test_l2_invariant_under_refinement():
    vals = []
    for n in (200, 400, 800):
        g = SpatialGrid(0.0, 1.0, n)
        x = g.centers
        a = DiscreteMeasure.from_density(g, 1 + 0.5 * np.sin(2 * np.pi * x))
        b = DiscreteMeasure.from_density(g, 1 + 0.5 * np.cos(2 * np.pi * x))
        vals.append(l2_error(a, b))
    assert abs(vals[0] - vals[2]) <= 1e-4 * vals[2]


def test_mixed_grids_resample():
    g1, g2 = SpatialGrid(0.0, 1.0, 100), SpatialGrid(0.0, 1.0, 400)
    a = DiscreteMeasure.from_density(g1, np.ones(100))
    b = resample(a, g2)
    assert np.allclose(b.density, 1.0)
    assert l2_error(a, b) == pytest.approx(0.0, abs=1e-12)
    assert hminus1_error(a, b) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(IncompatibleGridError):
        l2_error(a, DiscreteMeasure.from_density(SpatialGrid(0.0, 2.0, 100), np.ones(100)))


def test_hminus1_plateau_for_close_measures():
    g = SpatialGrid(0.0, 1.0, 2000)
    x = g.centers
    a = DiscreteMeasure.from_density(g, np.exp(-((x - 0.5) / 0.1) ** 2))
    b = DiscreteMeasure.from_density(g, np.exp(-((x - 0.5 - 1e-6) / 0.1) ** 2))
    assert hminus1_error(a, b) < 1e-5
