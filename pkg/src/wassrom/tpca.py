"""Tangent PCA: PCA of Log-mapped snapshots at the Frechet mean."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measure import (
    DiscreteMeasure,
    QuantileFunction,
    QuantileGrid,
    RepairInfo,
    SpatialGrid,
    TangentVector,
    exp_map,
    icdf_to_measure,
)
from .rbf import InterpSettings, rbf_fit_predict


@dataclass(frozen=True, eq=False)
class Reconstruction:
    """Output of an online reduced-model evaluation.

    ``quantile`` is admissible (monotone, in the domain).  ``raw`` is the
    quantile vector before repair; ``coefficients`` holds tangent
    coefficients (tPCA) or barycentric weights (gBar).
    """

    quantile: QuantileFunction
    coefficients: np.ndarray
    raw: np.ndarray
    info: RepairInfo
    mass: float = 1.0

    @property
    def repaired(self) -> bool:
        return self.info.repaired

    def measure(self, grid: SpatialGrid) -> DiscreteMeasure:
        return icdf_to_measure(self.quantile, grid, mass=self.mass)


@dataclass(frozen=True, eq=False)
class TpcaModel:
    reference: QuantileFunction
    modes: np.ndarray          # (rank, n_quad), orthonormal in quadrature L2
    sigma: np.ndarray
    coefficients: np.ndarray   # (N, rank)
    params: np.ndarray         # (N, p), normalized to the unit box
    lower: np.ndarray
    upper: np.ndarray
    mass: float = 1.0
    policy: str = "rearrange"

    @property
    def qgrid(self) -> QuantileGrid:
        return self.reference.qgrid

    @property
    def rank(self) -> int:
        return len(self.sigma)

    def tail(self, n) -> float:
        return float(np.sum(self.sigma[n:] ** 2) / len(self.coefficients))

    def normalize(self, z):
        return (np.asarray(z, dtype=float) - self.lower) / (self.upper - self.lower)

    def tangent(self, coefficients, n=None) -> np.ndarray:
        n = self.rank if n is None else n
        return np.asarray(coefficients)[..., :n] @ self.modes[:n]

    def _check_rank(self, n):
        if not 0 <= n <= self.rank:
            raise ValueError(f"rank {n} outside [0, {self.rank}]")

    def _reconstruct(self, coeffs, n, policy):
        t = TangentVector(self.qgrid, self.tangent(coeffs, n), self.reference.fingerprint)
        f, info = exp_map(t, self.reference, policy or self.policy, return_info=True)
        return Reconstruction(f, np.array(coeffs[:n]), self.reference.values + t.values,
                              info, self.mass)


def tpca_fit(snapshots, policy: str = "rearrange") -> TpcaModel:
    """Offline stage on a :class:`~wassrom.snapshots.SnapshotSet`."""
    F = np.asarray(snapshots.icdfs)
    if F.shape[0] < 2:
        raise ValueError("tPCA needs at least 2 snapshots")
    fam = snapshots.family
    q = fam.qgrid
    # offset by the first row so that identical snapshots give an exact mean
    mean = F[0] + (F - F[0]).mean(axis=0)
    w = QuantileFunction(q, mean, fam.domain)
    sq = np.sqrt(q.weight)
    U, S, Vt = np.linalg.svd((F - mean) * sq, full_matrices=False)
    lo, hi = np.array(fam.lower), np.array(fam.upper)
    return TpcaModel(w, Vt / sq, S, U * S, fam.normalize(snapshots.params), lo, hi,
                     float(np.mean(snapshots.masses)), policy)


def tpca_coefficients(model: TpcaModel, icdf_values) -> np.ndarray:
    """``<icdf_u - icdf_w, f_k>`` for one vector or a stack of them."""
    return (np.asarray(icdf_values) - model.reference.values) @ model.modes.T * model.qgrid.weight


def tpca_project(model: TpcaModel, u: QuantileFunction, n: int, policy=None) -> Reconstruction:
    """Exp_w of the projection of Log_w(u) onto the first ``n`` modes."""
    model._check_rank(n)
    if u.qgrid != model.qgrid:
        raise ValueError("quantile grid differs from the model's")
    return model._reconstruct(tpca_coefficients(model, u.values), n, policy)


def tpca_interpolate(model: TpcaModel, z, n: int, settings: InterpSettings = InterpSettings(),
                     policy=None) -> Reconstruction:
    """Exp_w of the tangent vector with RBF-interpolated coefficients at ``z``."""
    model._check_rank(n)
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if n == 0:
        coeffs = np.zeros(0)
    else:
        coeffs = rbf_fit_predict(model.params, model.coefficients[:, :n],
                                 model.normalize(z), settings)
    return model._reconstruct(np.atleast_1d(coeffs), n, policy)


def flat_projection_errors(model: TpcaModel, icdfs, n: int) -> np.ndarray:
    """W2 distance in the flat coordinates between each icdf and its rank-n
    tangent projection, before any monotone repair."""
    F = np.atleast_2d(icdfs)
    c = tpca_coefficients(model, F)
    r = F - model.reference.values - model.tangent(c, n)
    return np.sqrt(np.sum(r * r, axis=1) * model.qgrid.weight)
