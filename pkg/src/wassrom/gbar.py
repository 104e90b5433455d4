"""Greedy barycentric reduced model.

Offline, snapshots are added one at a time to a dictionary: first the two
farthest apart in W2, then repeatedly the training snapshot worst
approximated by its optimal barycenter in the current dictionary.  Online,
a target is represented by barycentric weights, either optimal (projection)
or interpolated over the parameter box.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qp
from .measure import QuantileFunction, QuantileGrid, RepairInfo
from .rbf import InterpSettings, rbf_fit_predict
from .tpca import Reconstruction

TIE_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class GbarDictionary:
    """``weights[k - 1]`` is the (N, k) table of optimal weights of every
    training snapshot in the first ``k`` dictionary members."""

    indices: np.ndarray        # selected training indices, in order
    icdfs: np.ndarray          # (n, n_quad)
    params: np.ndarray         # (N, p) training parameters, unit box
    weights: tuple
    history: np.ndarray        # max training residual with k members, k = 1..n
    qgrid: QuantileGrid
    domain: tuple
    lower: np.ndarray
    upper: np.ndarray
    mass: float = 1.0

    @property
    def size(self) -> int:
        return len(self.indices)

    def normalize(self, z):
        return (np.asarray(z, dtype=float) - self.lower) / (self.upper - self.lower)

    def quantile(self, k) -> QuantileFunction:
        return QuantileFunction(self.qgrid, self.icdfs[k], self.domain)

    def _check_rank(self, n):
        if not 1 <= n <= self.size:
            raise ValueError(f"rank {n} outside [1, {self.size}]")

    def _reconstruct(self, lam, n):
        v = lam @ self.icdfs[:n]
        f = QuantileFunction(self.qgrid, v, self.domain)
        return Reconstruction(f, lam, v, RepairInfo(), self.mass)


def farthest_pair(F, weight=1.0, block=512):
    """Indices (i, j), i < j, maximizing ``||F_i - F_j||``; ties go to the
    lexicographically smallest pair."""
    sq = np.einsum("ij,ij->i", F, F)
    n = len(F)
    best, best_pair = -1.0, (0, 1)
    for a in range(0, n, block):
        Fa = F[a:a + block]
        d2 = sq[a:a + block, None] + sq[None, :] - 2.0 * Fa @ F.T
        rows = np.arange(a, a + len(Fa))
        d2[np.arange(len(Fa)), rows] = -np.inf
        d2[np.arange(n)[None, :] <= rows[:, None]] = -np.inf
        m = float(d2.max())
        if m > best * (1 + TIE_RTOL) + 1e-300:
            flat = int(np.argmax(d2))
            best, best_pair = m, (a + flat // n, flat % n)
    i, j = best_pair
    return i, j, float(np.sqrt(weight * np.sum((F[i] - F[j]) ** 2)))


def _batched_weights(F, D, weight, warm):
    """Optimal weights of each row of ``F`` in the dictionary rows ``D``."""
    G = weight * (D @ D.T)
    C = weight * (F @ D.T)
    lam = np.empty((len(F), len(D)))
    for i in range(len(F)):
        lam[i], _ = qp.solve_simplex_qp(G, C[i], x0=None if warm is None else warm[i])
    R = F - lam @ D
    return lam, np.sqrt(weight * np.einsum("ij,ij->i", R, R))


def _argmax_lowest(res):
    m = res.max()
    return int(np.flatnonzero(res >= m - TIE_RTOL * m)[0])


def gbar_fit(snapshots, n_max: int, eps: float = 0.0, warm_start: bool = True) -> GbarDictionary:
    """Greedy selection on a :class:`~wassrom.snapshots.SnapshotSet`.

    Stops once the dictionary holds ``n_max`` snapshots or the largest
    training residual drops below ``eps``.
    """
    F = np.asarray(snapshots.icdfs)
    N = len(F)
    if N < 2:
        raise ValueError("gBar needs at least 2 snapshots")
    fam = snapshots.family
    w = fam.qgrid.weight
    n_max = max(1, min(n_max, N))

    # k = 1: the first member of the farthest pair
    i, j, _ = farthest_pair(F, w)
    sel = [i]
    tables = [np.ones((N, 1))]
    R = F - F[i]
    res = np.sqrt(w * np.einsum("ij,ij->i", R, R))
    history = [float(res.max())]
    nxt = j
    while len(sel) < n_max and history[-1] >= eps and history[-1] > 0:
        if nxt in sel:
            break
        sel.append(nxt)
        warm = None
        if warm_start:
            warm = np.hstack((tables[-1], np.zeros((N, 1))))
        lam, res = _batched_weights(F, F[sel], w, warm)
        res[sel] = 0.0
        tables.append(lam)
        history.append(float(max(res.max(), 0.0)))
        nxt = _argmax_lowest(res)
    lo, hi = np.array(fam.lower), np.array(fam.upper)
    return GbarDictionary(np.array(sel), F[sel].copy(), fam.normalize(snapshots.params),
                          tuple(tables), np.array(history), fam.qgrid, fam.domain, lo, hi,
                          float(np.mean(snapshots.masses)))


def gbar_project(dictionary: GbarDictionary, u: QuantileFunction, n: int,
                 warm_start=None) -> Reconstruction:
    """Optimal barycenter of ``u`` in the first ``n`` dictionary members."""
    dictionary._check_rank(n)
    if u.qgrid != dictionary.qgrid:
        raise ValueError("quantile grid differs from the dictionary's")
    lam, _ = qp.simplex_least_squares(dictionary.icdfs[:n], u.values,
                                      weight=dictionary.qgrid.weight, x0=warm_start)
    return dictionary._reconstruct(lam, n)


def gbar_interpolate(dictionary: GbarDictionary, z, n: int,
                     settings: InterpSettings = InterpSettings()) -> Reconstruction:
    """Barycenter with weights interpolated from the training table at ``z``,
    projected back onto the simplex."""
    dictionary._check_rank(n)
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if n == 1:
        lam = np.ones(1)
    else:
        raw = rbf_fit_predict(dictionary.params, dictionary.weights[n - 1],
                              dictionary.normalize(z), settings)
        lam = qp.project_to_simplex(raw)
    return dictionary._reconstruct(lam, n)
