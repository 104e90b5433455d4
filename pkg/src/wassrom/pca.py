"""Linear PCA/POD of raw densities in L2(Omega), the comparison baseline."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measure import DiscreteMeasure, SpatialGrid


@dataclass(frozen=True, eq=False)
class PcaModel:
    """Modes are orthonormal for ``<f, g> = sum f g dx``.

    ``sigma[k]`` is the k-th singular value of the grid-weighted snapshot
    matrix, so the mean squared training error at rank n is
    ``sum(sigma[n:]**2) / N``.
    """

    grid: SpatialGrid
    modes: np.ndarray          # (rank, n_cells)
    sigma: np.ndarray          # (rank,)
    coefficients: np.ndarray   # (N, rank)
    mean: np.ndarray           # zeros unless centered
    centered: bool
    params: np.ndarray | None = None

    @property
    def rank(self) -> int:
        return len(self.sigma)

    def tail(self, n) -> float:
        """``(1/N) sum_{k>n} sigma_k^2``."""
        return float(np.sum(self.sigma[n:] ** 2) / len(self.coefficients))

    def reconstruct(self, coefficients, n=None):
        n = self.rank if n is None else n
        c = np.asarray(coefficients)[..., :n]
        return self.mean + c @ self.modes[:n]


def _as_matrix(snapshots):
    if hasattr(snapshots, "physical_densities"):
        return snapshots.family.grid, np.asarray(snapshots.physical_densities), snapshots.params
    ms = list(snapshots)
    grid = ms[0].grid
    for m in ms[1:]:
        if m.grid != grid:
            raise ValueError("snapshots must share a spatial grid")
    return grid, np.vstack([m.physical_density for m in ms]), None


def pca_fit(snapshots, center: bool = False) -> PcaModel:
    """POD of a snapshot set (or a list of DiscreteMeasure) in grid-weighted L2.

    Densities are used with their physical mass.  All min(N, n_cells) modes
    are kept, including those at roundoff level.
    """
    grid, X, params = _as_matrix(snapshots)
    if X.shape[0] < 2:
        raise ValueError("PCA needs at least 2 snapshots")
    mean = X[0] + (X - X[0]).mean(axis=0) if center else np.zeros(X.shape[1])
    sq = np.sqrt(grid.dx)
    U, S, Vt = np.linalg.svd((X - mean) * sq, full_matrices=False)
    return PcaModel(grid, Vt / sq, S, U * S, mean, center, params)


def pca_coefficients(model: PcaModel, densities):
    return (np.asarray(densities) - model.mean) @ model.modes.T * model.grid.dx


def pca_project(model: PcaModel, u, n: int) -> np.ndarray:
    """Orthogonal projection onto the first ``n`` modes.

    ``u`` is a DiscreteMeasure (its physical density is used) or a raw density
    array.  Returns the (possibly signed) projected density; ``n = 0`` gives
    the mean (zero for uncentered PCA).
    """
    if not 0 <= n <= model.rank:
        raise ValueError(f"rank {n} outside [0, {model.rank}]")
    if isinstance(u, DiscreteMeasure):
        if u.grid != model.grid:
            raise ValueError("measure and model grids differ")
        u = u.physical_density
    c = pca_coefficients(model, u)
    return model.reconstruct(c, n)


def training_errors(model: PcaModel, n: int) -> np.ndarray:
    """L2 errors of the rank-n reconstruction of each training snapshot,
    computed from the coefficient table."""
    return np.sqrt(np.sum(model.coefficients[:, n:] ** 2, axis=1))
