"""Probability measures on an interval and their 1D Wasserstein geometry.

A measure is carried either as a cell-wise constant density on a
:class:`SpatialGrid` or as its quantile function (icdf) sampled at the
midpoints of a :class:`QuantileGrid`.  In the quantile coordinate the
W2 distance is a plain L2 norm, Exp/Log are addition/subtraction and
barycenters are convex combinations, which is what every reduced model in
this package relies on.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import (
    DomainViolationError,
    IncompatibleGridError,
    InvalidMeasureError,
    InvalidWeightsError,
    TangentOutsideDomainError,
)
from . import qp

DEFAULT_N_QUAD = 1024
WEIGHT_TOL = 1e-12
MONOTONE_RTOL = 1e-12


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform cell partition of ``[x_min, x_max]``."""

    x_min: float
    x_max: float
    n_cells: int

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValueError(f"need x_min < x_max, got [{self.x_min}, {self.x_max}]")
        if int(self.n_cells) != self.n_cells or self.n_cells < 2:
            raise ValueError(f"n_cells must be an integer >= 2, got {self.n_cells}")
        object.__setattr__(self, "x_min", float(self.x_min))
        object.__setattr__(self, "x_max", float(self.x_max))
        object.__setattr__(self, "n_cells", int(self.n_cells))

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dx(self) -> float:
        return self.length / self.n_cells

    @cached_property
    def edges(self) -> np.ndarray:
        e = np.linspace(self.x_min, self.x_max, self.n_cells + 1)
        e.setflags(write=False)
        return e

    @cached_property
    def centers(self) -> np.ndarray:
        c = 0.5 * (self.edges[:-1] + self.edges[1:])
        c.setflags(write=False)
        return c

    def cell_index(self, x):
        """Index of the cell containing ``x`` (right edge belongs to last cell)."""
        i = np.floor((np.asarray(x, dtype=float) - self.x_min) / self.dx).astype(int)
        return np.clip(i, 0, self.n_cells - 1)

    def contains(self, x, tol=0.0) -> bool:
        x = np.asarray(x)
        return bool(np.all(x >= self.x_min - tol) and np.all(x <= self.x_max + tol))


@dataclass(frozen=True)
class QuantileGrid:
    """Midpoint quadrature nodes ``s_j = (j - 1/2) / n_quad`` on (0, 1)."""

    n_quad: int = DEFAULT_N_QUAD

    def __post_init__(self):
        if int(self.n_quad) != self.n_quad or self.n_quad < 1:
            raise ValueError(f"n_quad must be a positive integer, got {self.n_quad}")
        object.__setattr__(self, "n_quad", int(self.n_quad))

    @cached_property
    def nodes(self) -> np.ndarray:
        s = (np.arange(self.n_quad) + 0.5) / self.n_quad
        s.setflags(write=False)
        return s

    @property
    def weight(self) -> float:
        return 1.0 / self.n_quad

    def inner(self, f, g):
        return float(np.dot(f, g)) / self.n_quad

    def norm(self, f) -> float:
        return float(np.sqrt(np.dot(f, f) / self.n_quad))


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Probability density, constant on each grid cell.

    ``density`` integrates to one; ``mass`` is the total mass of the physical
    field before normalization (see :meth:`from_density`).
    """

    grid: SpatialGrid
    density: np.ndarray
    mass: float = 1.0

    def __post_init__(self):
        d = _frozen(self.density)
        if d.shape != (self.grid.n_cells,):
            raise InvalidMeasureError(
                f"density has shape {d.shape}, expected ({self.grid.n_cells},)")
        if not np.all(np.isfinite(d)):
            raise InvalidMeasureError("density contains non-finite values")
        if np.any(d < 0):
            raise InvalidMeasureError(f"negative density (min {d.min():.3e})")
        total = d.sum() * self.grid.dx
        if abs(total - 1.0) > 1e-9:
            raise InvalidMeasureError(
                f"density integrates to {total!r}; use DiscreteMeasure.from_density")
        if not self.mass > 0:
            raise InvalidMeasureError(f"mass must be positive, got {self.mass}")
        object.__setattr__(self, "density", d)
        object.__setattr__(self, "mass", float(self.mass))

    @classmethod
    def from_density(cls, grid: SpatialGrid, density, clip_negative=0.0):
        """Normalize a raw nonnegative density and record its total mass.

        Values in ``[-clip_negative, 0)`` are treated as roundoff and zeroed.
        """
        d = np.array(density, dtype=float)
        if clip_negative > 0:
            d[(d < 0) & (d >= -clip_negative)] = 0.0
        if np.any(d < 0):
            raise InvalidMeasureError(f"negative density (min {d.min():.3e})")
        mass = d.sum() * grid.dx
        if not np.isfinite(mass) or mass <= 0:
            raise InvalidMeasureError("measure has zero (or non-finite) total mass")
        return cls(grid, d / mass, mass)

    @property
    def physical_density(self) -> np.ndarray:
        return self.density * self.mass

    @cached_property
    def cdf_edges(self) -> np.ndarray:
        """Cumulative distribution at the cell edges (first 0, last 1)."""
        c = np.concatenate(([0.0], np.cumsum(self.density) * self.grid.dx))
        c /= c[-1]
        c.setflags(write=False)
        return c


@dataclass(frozen=True, eq=False)
class QuantileFunction:
    """Nondecreasing icdf values at the nodes of ``qgrid``."""

    qgrid: QuantileGrid
    values: np.ndarray
    domain: tuple = (-np.inf, np.inf)

    def __post_init__(self):
        v = _frozen(self.values)
        if v.shape != (self.qgrid.n_quad,):
            raise IncompatibleGridError(
                f"values have shape {v.shape}, expected ({self.qgrid.n_quad},)")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "domain", (float(self.domain[0]), float(self.domain[1])))

    @property
    def fingerprint(self) -> str:
        return _fingerprint(self.values)

    def is_valid(self, rtol=MONOTONE_RTOL) -> bool:
        """Monotone and inside the closure of the domain, up to ``rtol``."""
        tol = _abs_tol(self.domain, self.values, rtol)
        v = self.values
        if np.any(np.diff(v) < -tol):
            return False
        return bool(np.all(v >= self.domain[0] - tol) and np.all(v <= self.domain[1] + tol))


@dataclass(frozen=True, eq=False)
class TangentVector:
    """Element of the tangent cone at a reference measure (icdf difference)."""

    qgrid: QuantileGrid
    values: np.ndarray
    reference: str = ""

    def __post_init__(self):
        v = _frozen(self.values)
        if v.shape != (self.qgrid.n_quad,):
            raise IncompatibleGridError(
                f"values have shape {v.shape}, expected ({self.qgrid.n_quad},)")
        object.__setattr__(self, "values", v)

    def norm(self) -> float:
        return self.qgrid.norm(self.values)


@dataclass(frozen=True, eq=False)
class BarycentricWeights:
    """A point of the probability simplex."""

    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values)
        check_weights(v)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


@dataclass(frozen=True)
class RepairInfo:
    """What :func:`monotonize` had to do to a raw quantile vector."""

    repaired: bool = False
    max_descent: float = 0.0
    n_clamped: int = 0
    max_overshoot: float = 0.0


def _fingerprint(values) -> str:
    return hashlib.blake2b(np.ascontiguousarray(values).tobytes(), digest_size=8).hexdigest()


def _abs_tol(domain, values, rtol):
    lo, hi = domain
    if np.isfinite(lo) and np.isfinite(hi):
        scale = hi - lo
    else:
        scale = max(1.0, float(np.ptp(values)) if len(values) else 1.0)
    return rtol * scale


def check_weights(weights, tol=WEIGHT_TOL):
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or len(w) == 0:
        raise InvalidWeightsError("weights must be a nonempty vector")
    if not np.all(np.isfinite(w)):
        raise InvalidWeightsError("weights contain non-finite values")
    if w.min() < -tol:
        raise InvalidWeightsError(f"negative weight {w.min():.3e}")
    if abs(w.sum() - 1.0) > tol:
        raise InvalidWeightsError(f"weights sum to {w.sum()!r}, not 1")
    return w


def _same_qgrid(*fs):
    q = fs[0].qgrid
    for f in fs[1:]:
        if f.qgrid != q:
            raise IncompatibleGridError(
                f"quantile grids differ: n_quad {q.n_quad} vs {f.qgrid.n_quad}")
    return q


def _stack(dictionary):
    """Rows of icdf values, shared grid and domain of a dictionary."""
    if isinstance(dictionary, QuantileFunction):
        dictionary = [dictionary]
    if len(dictionary) == 0:
        raise ValueError("empty dictionary")
    q = _same_qgrid(*dictionary)
    return np.vstack([f.values for f in dictionary]), q, dictionary[0].domain


# --------------------------------------------------------------------------
# cdf / icdf transforms


def cdf_to_icdf(m: DiscreteMeasure, qgrid: QuantileGrid | None = None) -> QuantileFunction:
    """Generalized inverse ``inf{x : cdf(x) > s}`` at the quadrature nodes.

    The cdf is piecewise linear across each cell; zero-density cells give flat
    cdf stretches that are jumped over.
    """
    q = qgrid or QuantileGrid()
    grid = m.grid
    cdf = m.cdf_edges
    if cdf[-1] <= 0:
        raise InvalidMeasureError("zero total mass")
    s = q.nodes
    i = np.clip(np.searchsorted(cdf, s, side="right") - 1, 0, grid.n_cells - 1)
    cell_mass = cdf[i + 1] - cdf[i]
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(cell_mass > 0, (s - cdf[i]) / cell_mass, 0.0)
    x = grid.edges[i] + np.clip(frac, 0.0, 1.0) * grid.dx
    return QuantileFunction(q, x, (grid.x_min, grid.x_max))


def _extended_quantile(values, nodes, lo, hi):
    """Piecewise-linear quantile curve through the nodes, extended to s=0 and s=1."""
    n = len(values)
    if n == 1:
        f0 = f1 = values[0]
    else:
        f0 = values[0] - (values[1] - values[0]) * nodes[0] / (nodes[1] - nodes[0])
        f1 = values[-1] + (values[-1] - values[-2]) * (1 - nodes[-1]) / (nodes[-1] - nodes[-2])
    f_ext = np.concatenate(([max(lo, f0)], values, [min(hi, f1)]))
    s_ext = np.concatenate(([0.0], nodes, [1.0]))
    return s_ext, f_ext


def quantile_cdf(f_ext, s_ext, x):
    """Lebesgue measure of ``{s : f(s) <= x}`` for the piecewise-linear curve."""
    x = np.asarray(x, dtype=float)
    k = np.searchsorted(f_ext, x, side="right")
    out = np.empty_like(x)
    low = k == 0
    high = k == len(f_ext)
    mid = ~(low | high)
    km = k[mid]
    f_lo, f_hi = f_ext[km - 1], f_ext[km]
    s_lo, s_hi = s_ext[km - 1], s_ext[km]
    out[mid] = s_lo + (x[mid] - f_lo) / (f_hi - f_lo) * (s_hi - s_lo)
    out[low] = 0.0
    out[high] = 1.0
    return out


def icdf_to_measure(f: QuantileFunction, grid: SpatialGrid, method: str = "linear",
                    mass: float = 1.0) -> DiscreteMeasure:
    """Push the uniform measure on (0, 1) forward through ``f`` onto ``grid``.

    ``method="histogram"`` drops weight ``1/n_quad`` into the cell holding each
    quantile value.  ``method="linear"`` spreads each node interval's weight
    uniformly between consecutive quantile values, which is the exact inverse
    of the piecewise-linear cdf used by :func:`cdf_to_icdf`; an atom (flat
    stretch of ``f``) still lands in a single cell.
    """
    v = np.asarray(f.values)
    tol = MONOTONE_RTOL * grid.length
    if v.min() < grid.x_min - tol or v.max() > grid.x_max + tol:
        raise DomainViolationError(
            f"quantile values span [{v.min():.6g}, {v.max():.6g}] outside "
            f"[{grid.x_min:.6g}, {grid.x_max:.6g}]")
    if np.any(np.diff(v) < -tol):
        raise DomainViolationError(
            f"quantile values decrease by up to {-np.diff(v).min():.3e}; monotonize first")
    v = np.clip(np.maximum.accumulate(v), grid.x_min, grid.x_max)
    if method == "histogram":
        counts = np.bincount(grid.cell_index(v), minlength=grid.n_cells)
        density = counts / (len(v) * grid.dx)
    elif method == "linear":
        s_ext, f_ext = _extended_quantile(v, f.qgrid.nodes, grid.x_min, grid.x_max)
        cdf = quantile_cdf(f_ext, s_ext, grid.edges)
        cdf[0], cdf[-1] = 0.0, 1.0
        density = np.maximum(np.diff(cdf), 0.0) / grid.dx
        density /= density.sum() * grid.dx
    else:
        raise ValueError(f"unknown method {method!r}")
    return DiscreteMeasure(grid, density, mass)


# --------------------------------------------------------------------------
# Wasserstein geometry


def w2_distance(u: QuantileFunction, v: QuantileFunction) -> float:
    q = _same_qgrid(u, v)
    return q.norm(u.values - v.values)


def log_map(u: QuantileFunction, w: QuantileFunction) -> TangentVector:
    """``Log_w(u) = icdf_u - icdf_w``."""
    q = _same_qgrid(u, w)
    return TangentVector(q, u.values - w.values, w.fingerprint)


def _repair(values, policy, domain, rtol=MONOTONE_RTOL):
    v = np.array(values, dtype=float)
    lo, hi = domain
    tol = _abs_tol(domain, v, rtol)
    d = np.diff(v)
    max_descent = float(max(0.0, -d.min())) if len(d) else 0.0
    overshoot = float(max(0.0, lo - v.min(), v.max() - hi))
    if policy == "reject":
        if max_descent > tol or overshoot > tol:
            raise TangentOutsideDomainError(
                f"quantile vector not admissible: max descent {max_descent:.3e}, "
                f"domain overshoot {overshoot:.3e}", max_descent)
        out = np.clip(np.maximum.accumulate(v), lo, hi)
        return out, RepairInfo(False, max_descent, 0, overshoot)
    if policy != "rearrange":
        raise ValueError(f"unknown policy {policy!r}")
    repaired = max_descent > tol or overshoot > tol
    out = np.sort(v) if max_descent > 0 else v
    n_clamped = int(np.count_nonzero((out < lo) | (out > hi)))
    out = np.clip(out, lo, hi)
    return out, RepairInfo(repaired, max_descent, n_clamped, overshoot)


def monotonize(values, policy: str = "rearrange", *, domain=(-np.inf, np.inf),
               qgrid: QuantileGrid | None = None, return_info: bool = False):
    """Make a raw quantile vector admissible.

    ``rearrange`` sorts (the L2 projection onto nondecreasing vectors) and then
    clamps to ``domain``.  ``reject`` raises
    :class:`~wassrom.errors.TangentOutsideDomainError` if any descent or
    domain overshoot exceeds ``1e-12 * (x_max - x_min)``.
    """
    v = np.asarray(values, dtype=float)
    q = qgrid or QuantileGrid(len(v))
    out, info = _repair(v, policy, domain)
    f = QuantileFunction(q, out, domain)
    return (f, info) if return_info else f


def exp_map(t: TangentVector, w: QuantileFunction, policy: str = "rearrange",
            return_info: bool = False):
    """Quantile side of ``Exp_w(t) = icdf^{-1}(icdf_w + t)``.

    Compose with :func:`icdf_to_measure` to get the density.
    """
    if t.qgrid != w.qgrid:
        raise IncompatibleGridError(
            f"quantile grids differ: n_quad {t.qgrid.n_quad} vs {w.qgrid.n_quad}")
    if t.reference and t.reference != w.fingerprint:
        raise IncompatibleGridError("tangent vector was built at a different reference measure")
    out, info = _repair(w.values + t.values, policy, w.domain)
    f = QuantileFunction(w.qgrid, out, w.domain)
    return (f, info) if return_info else f


def barycenter(dictionary: Sequence[QuantileFunction], weights) -> QuantileFunction:
    """Wasserstein barycenter: the weighted average of the icdfs."""
    A, q, dom = _stack(dictionary)
    lam = check_weights(np.asarray(weights))
    if len(lam) != A.shape[0]:
        raise InvalidWeightsError(f"{len(lam)} weights for {A.shape[0]} dictionary elements")
    return QuantileFunction(q, lam @ A, dom)


def optimal_weights(target: QuantileFunction, dictionary: Sequence[QuantileFunction],
                    warm_start=None):
    """Weights of the optimal barycenter of ``target`` in ``dictionary``.

    Solves ``min ||icdf_target - sum_i lam_i icdf_i||^2`` over the simplex and
    returns ``(BarycentricWeights, W2 residual)``.
    """
    A, q, _ = _stack(dictionary)
    if target.qgrid != q:
        raise IncompatibleGridError("target and dictionary use different quantile grids")
    lam, res = qp.simplex_least_squares(A, target.values, weight=q.weight, x0=warm_start)
    return BarycentricWeights(lam), res


def frechet_mean(functions: Sequence[QuantileFunction]) -> QuantileFunction:
    if len(functions) == 0:
        raise ValueError("Frechet mean of an empty set")
    A, q, dom = _stack(functions)
    return QuantileFunction(q, A.mean(axis=0), dom)


def dirac_surrogate(grid: SpatialGrid, x: float) -> DiscreteMeasure:
    """All mass in the cell containing ``x``."""
    d = np.zeros(grid.n_cells)
    d[grid.cell_index(x)] = 1.0 / grid.dx
    return DiscreteMeasure(grid, d)


__all__ = [
    "SpatialGrid", "QuantileGrid", "DiscreteMeasure", "QuantileFunction", "TangentVector",
    "BarycentricWeights", "RepairInfo", "cdf_to_icdf", "icdf_to_measure", "w2_distance",
    "log_map", "exp_map", "monotonize", "barycenter", "optimal_weights", "frechet_mean",
    "dirac_surrogate", "check_weights", "quantile_cdf",
]
