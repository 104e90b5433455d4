"""Error metrics: L2(Omega), W2 and the H^-1 dual norm via P1 finite elements."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

from .errors import IncompatibleGridError
from .measure import DiscreteMeasure, QuantileFunction, SpatialGrid, w2_distance

DEFAULT_H = 1e-3


@dataclass(frozen=True)
class FemMesh:
    """Uniform P1 mesh on ``[x_min, x_max]`` with homogeneous Dirichlet ends.

    The element count is ``round(L / h)``, so the actual size ``h_eff`` may
    differ slightly from ``h``.
    """

    x_min: float
    x_max: float
    h: float = DEFAULT_H

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValueError("need x_min < x_max")
        if not self.h > 0:
            raise ValueError("h must be positive")

    @property
    def n_elements(self) -> int:
        return max(2, int(round((self.x_max - self.x_min) / self.h)))

    @property
    def h_eff(self) -> float:
        return (self.x_max - self.x_min) / self.n_elements

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_elements + 1)

    @cached_property
    def _factor(self):
        # stiffness (2, -1) / h on the interior nodes, upper banded storage
        m = self.n_elements - 1
        ab = np.empty((2, m))
        ab[0] = -1.0 / self.h_eff
        ab[0, 0] = 0.0
        ab[1] = 2.0 / self.h_eff
        return cholesky_banded(ab)

    def solve(self, load):
        """Interior nodal values of the discrete Dirichlet solution."""
        load = np.asarray(load, dtype=float)
        return cho_solve_banded((self._factor, False), load)

    @classmethod
    def for_grid(cls, grid: SpatialGrid, h: float = DEFAULT_H):
        return cls(grid.x_min, grid.x_max, h)


def _second_primitive(grid: SpatialGrid, f, x):
    """``G(x) = int_{x_min}^x int_{x_min}^y f`` for ``f`` constant per cell."""
    e = grid.edges
    dx = grid.dx
    F = np.concatenate(([0.0], np.cumsum(f) * dx))
    G = np.concatenate(([0.0], np.cumsum(F[:-1] * dx + 0.5 * f * dx * dx)))
    x = np.clip(np.asarray(x, dtype=float), e[0], e[-1])
    j = np.clip(np.searchsorted(e, x, side="right") - 1, 0, grid.n_cells - 1)
    r = x - e[j]
    return G[j] + F[j] * r + 0.5 * f[j] * r * r


def p1_load(grid: SpatialGrid, f, mesh: FemMesh):
    """Exact ``int f phi_i`` for the interior hat functions."""
    G = _second_primitive(grid, np.asarray(f, dtype=float), mesh.nodes)
    return (G[2:] - 2.0 * G[1:-1] + G[:-2]) / mesh.h_eff


def hminus1_norm(grid: SpatialGrid, f, mesh: FemMesh | None = None) -> float:
    """``sqrt(int f phi)`` where ``-phi'' = f``, ``phi = 0`` on the boundary,
    solved by P1 elements.  ``f`` is piecewise constant on ``grid``."""
    mesh = mesh or FemMesh.for_grid(grid)
    b = p1_load(grid, f, mesh)
    phi = mesh.solve(b)
    return float(np.sqrt(max(b @ phi, 0.0)))


def resample(m: DiscreteMeasure, grid: SpatialGrid) -> DiscreteMeasure:
    """Mass-conservative transfer onto ``grid`` through the cdf."""
    if m.grid == grid:
        return m
    cdf = np.interp(grid.edges, m.grid.edges, m.cdf_edges, left=0.0, right=1.0)
    d = np.maximum(np.diff(cdf), 0.0) / grid.dx
    return DiscreteMeasure(grid, d / (d.sum() * grid.dx), m.mass)


def _physical_difference(u, v):
    """Physical density difference on a common grid (the finer one)."""
    gu = u.grid if isinstance(u, DiscreteMeasure) else None
    gv = v.grid if isinstance(v, DiscreteMeasure) else None
    grid = gu or gv
    if gu is not None and gv is not None and gu != gv:
        if (gu.x_min, gu.x_max) != (gv.x_min, gv.x_max):
            raise IncompatibleGridError("measures live on different intervals")
        grid = gu if gu.n_cells >= gv.n_cells else gv
        u, v = resample(u, grid), resample(v, grid)

    def dens(a):
        return a.physical_density if isinstance(a, DiscreteMeasure) else np.asarray(a, float)

    return grid, dens(u) - dens(v)


def l2_error(u, v) -> float:
    """L2 norm of the physical density difference.  Either argument may be a
    raw density array on the other's grid (e.g. a signed PCA reconstruction)."""
    grid, f = _physical_difference(u, v)
    return float(np.sqrt(np.sum(f * f) * grid.dx))


def hminus1_error(u, v, mesh: FemMesh | None = None) -> float:
    grid, f = _physical_difference(u, v)
    return hminus1_norm(grid, f, mesh)


def w2_error(u: QuantileFunction, v: QuantileFunction) -> float:
    return w2_distance(u, v)
