"""Local multiquadric RBF interpolation of coefficient maps over parameters.

Each query uses its own neighbor set (r nearest or a tau-ball) and solves

    [Phi + eps I   P] [a]   [v]
    [P^T           0] [b] = [0],   Phi_ij = sqrt(|z_i - z_j|^2 + c^2),

with ``P = [1, z]`` so that affine fields are reproduced exactly.  ``c`` is the
median pairwise distance within the neighbor set.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NeighborhoodError

EXACT_HIT = 1e-13


class RbfFallbackWarning(RuntimeWarning):
    """A local system was singular and the nearest neighbor value was used."""


@dataclass(frozen=True)
class InterpSettings:
    policy: str = "knn"       # "knn" or "ball"
    r: int = 10
    tau: float = 0.1
    ridge: float = 1e-10
    shape: float | None = None   # None: median neighbor distance
    polynomial: bool = True

    def __post_init__(self):
        if self.policy not in ("knn", "ball"):
            raise ValueError(f"unknown neighbor policy {self.policy!r}")
        if self.r < 1:
            raise ValueError("r must be positive")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.ridge < 0:
            raise ValueError("ridge must be nonnegative")

    def validate_dim(self, p):
        if self.policy == "knn" and self.polynomial and self.r < p + 1:
            raise ValueError(f"r = {self.r} neighbors cannot fix an affine tail in {p} dimensions")


def neighbors(points, query, settings: InterpSettings):
    """Indices of the neighbor set of ``query`` (sorted by distance, then index)."""
    d = np.sqrt(np.sum((points - query) ** 2, axis=1))
    if settings.policy == "knn":
        k = min(settings.r, len(points))
        idx = np.argpartition(d, k - 1)[:k] if k < len(points) else np.arange(len(points))
    else:
        idx = np.flatnonzero(d <= settings.tau)
        if idx.size == 0:
            raise NeighborhoodError(
                f"no training parameter within tau = {settings.tau} of {np.round(query, 6)}")
    return idx[np.lexsort((idx, d[idx]))], d


def _local_solve(Z, V, q, settings):
    m, p = Z.shape
    D = np.sqrt(np.sum((Z[:, None, :] - Z[None, :, :]) ** 2, axis=-1))
    c = settings.shape
    if c is None:
        off = D[np.triu_indices(m, 1)]
        c = float(np.median(off)) if off.size else 1.0
        c = c if c > 0 else 1.0
    phi = np.sqrt(D * D + c * c)
    phi[np.diag_indices(m)] += settings.ridge
    use_poly = settings.polynomial and m >= p + 1
    k = p + 1 if use_poly else 0
    A = np.zeros((m + k, m + k))
    A[:m, :m] = phi
    if use_poly:
        P = np.hstack((np.ones((m, 1)), Z))
        A[:m, m:] = P
        A[m:, :m] = P.T
    rhs = np.zeros((m + k, V.shape[1]))
    rhs[:m] = V
    sol = np.linalg.solve(A, rhs)
    if not np.all(np.isfinite(sol)):
        raise np.linalg.LinAlgError("non-finite RBF coefficients")
    if np.linalg.cond(A) > 1e14:
        raise np.linalg.LinAlgError("ill-conditioned RBF system")
    dq = np.sqrt(np.sum((Z - q) ** 2, axis=1))
    out = np.sqrt(dq * dq + c * c) @ sol[:m]
    if use_poly:
        out += sol[m] + q @ sol[m + 1:]
    return out


def rbf_fit_predict(train_points, values, query, settings: InterpSettings = InterpSettings()):
    """Interpolate ``values`` (shape (N,) or (N, m)) at ``query`` (shape (p,)
    or (Q, p)).

    Points should already be scaled to comparable units (the reduced models
    pass parameters mapped onto the unit box).  A query that coincides with a
    training point returns its stored value.
    """
    Z = np.asarray(train_points, dtype=float)
    if Z.ndim == 1:
        Z = Z[:, None]
    V = np.asarray(values, dtype=float)
    scalar = V.ndim == 1
    V2 = V[:, None] if scalar else V
    if len(V2) != len(Z):
        raise ValueError(f"{len(V2)} values for {len(Z)} points")
    if len(Z) == 0:
        raise NeighborhoodError("empty training set")
    settings.validate_dim(Z.shape[1])
    Q = np.asarray(query, dtype=float)
    single = Q.ndim == 1
    Q2 = np.atleast_2d(Q)
    if Q2.shape[1] != Z.shape[1]:
        Q2 = Q2.reshape(-1, Z.shape[1])

    out = np.empty((len(Q2), V2.shape[1]))
    for j, q in enumerate(Q2):
        idx, d = neighbors(Z, q, settings)
        nearest = idx[0]
        if d[nearest] <= EXACT_HIT * max(1.0, float(np.abs(q).max())):
            out[j] = V2[nearest]
            continue
        if idx.size == 1:
            out[j] = V2[nearest]
            continue
        try:
            out[j] = _local_solve(Z[idx], V2[idx], q, settings)
        except np.linalg.LinAlgError as exc:
            warnings.warn(f"RBF fallback to nearest neighbor at {q}: {exc}",
                          RbfFallbackWarning, stacklevel=2)
            out[j] = V2[nearest]
    if scalar:
        out = out[:, 0]
    return out[0] if single else out
