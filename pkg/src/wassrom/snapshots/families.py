"""Parametric problem families and snapshot sets."""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import ParameterOutOfBoxError
from ..measure import (
    DiscreteMeasure,
    QuantileFunction,
    QuantileGrid,
    SpatialGrid,
    cdf_to_icdf,
)
from . import burgers_fv, camassa_holm, closed_form, kdv

BOX_TOL = 1e-12


@dataclass(frozen=True)
class ParameterPoint:
    values: tuple
    names: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "names", tuple(self.names))
        if len(self.values) != len(self.names):
            raise ValueError("one name per parameter component")

    def __getitem__(self, name):
        return self.values[self.names.index(name)]

    def as_array(self):
        return np.array(self.values)


@dataclass(frozen=True)
class ProblemFamily:
    """A parametric solution set: parameter box, grids and solver settings.

    ``snapshot(z)`` returns the measure on ``grid`` (normalized, with its
    physical mass) and its icdf on ``qgrid``.
    """

    name: str
    param_names: tuple
    lower: tuple
    upper: tuple
    grid: SpatialGrid
    qgrid: QuantileGrid = QuantileGrid()
    settings: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.param_names)

    @property
    def domain(self):
        return (self.grid.x_min, self.grid.x_max)

    def check(self, z):
        z = np.atleast_1d(np.asarray(z, dtype=float))
        if z.shape != (self.dim,):
            raise ParameterOutOfBoxError(
                f"{self.name} expects {self.dim} parameters {self.param_names}, got {z.shape}")
        lo, hi = np.array(self.lower), np.array(self.upper)
        tol = BOX_TOL * np.maximum(1.0, hi - lo)
        if np.any(z < lo - tol) or np.any(z > hi + tol):
            raise ParameterOutOfBoxError(
                f"{self.name}: parameter {dict(zip(self.param_names, z))} outside box "
                f"{list(zip(self.lower, self.upper))}")
        return np.clip(z, lo, hi)

    def point(self, z) -> ParameterPoint:
        return ParameterPoint(tuple(np.atleast_1d(z)), self.param_names)

    def normalize(self, z):
        """Map parameters affinely onto the unit box."""
        lo, hi = np.array(self.lower), np.array(self.upper)
        return (np.asarray(z, dtype=float) - lo) / (hi - lo)

    def sample(self, count, seed):
        rng = np.random.default_rng(seed)
        return rng.uniform(self.lower, self.upper, size=(count, self.dim))

    def snapshot(self, z):
        z = self.check(z)
        raw, icdf = _GENERATORS[self.name](self, z)
        m = DiscreteMeasure.from_density(
            self.grid, raw, clip_negative=1e-10 * max(1.0, float(np.abs(raw).max())))
        if icdf is None:
            f = cdf_to_icdf(m, self.qgrid)
        else:
            f = QuantileFunction(self.qgrid, np.clip(icdf, *self.domain), self.domain)
        return m, f

    def with_grids(self, n_cells=None, n_quad=None, domain=None):
        grid = self.grid
        if n_cells is not None or domain is not None:
            lo, hi = domain if domain is not None else (grid.x_min, grid.x_max)
            grid = SpatialGrid(lo, hi, n_cells or grid.n_cells)
        qgrid = QuantileGrid(n_quad) if n_quad is not None else self.qgrid
        return replace(self, grid=grid, qgrid=qgrid)


def _transport(fam, z):
    (y,) = z
    raw = closed_form.cell_averages_from_cdf(lambda x: closed_form.transport_cdf(y, x),
                                             fam.grid.edges)
    return raw, closed_form.transport_icdf(y, fam.qgrid.nodes)


def _burgers_inviscid(fam, z):
    t, y = z
    raw = closed_form.cell_averages_from_cdf(lambda x: closed_form.burgers_cdf(y, t, x),
                                             fam.grid.edges)
    return raw, closed_form.burgers_icdf(y, t, fam.qgrid.nodes)


def _burgers_viscous(fam, z):
    t, y, nu = z
    (u,) = burgers_fv.solve(fam.grid, y, nu, t,
                            settings=fam.settings.get("solver", burgers_fv.BurgersSolverSettings()))
    return u, None


def _camassa_holm(fam, z):
    t, q10 = z
    s = fam.settings.get("peakons", camassa_holm.PeakonSettings())
    q, p = camassa_holm.integrate(q10, t, s)
    return camassa_holm.peakon_cell_averages(q, p, fam.grid.edges, s.alpha), None


def _kdv(fam, z):
    t, k2 = z
    return kdv.cell_averages(fam.grid.edges, t, k2), None


_GENERATORS = {
    "transport": _transport,
    "burgers_inviscid": _burgers_inviscid,
    "burgers_viscous": _burgers_viscous,
    "camassa_holm": _camassa_holm,
    "kdv": _kdv,
}


def make_family(name: str, n_cells=None, n_quad=None, domain=None, **settings) -> ProblemFamily:
    """Family with its default box and grids; ``n_cells``, ``n_quad`` and
    ``domain`` override the grids."""
    if name == "transport":
        fam = ProblemFamily(name, ("y",), (0.0,), (1.0,), SpatialGrid(-1.0, 1.0, 2000))
    elif name == "burgers_inviscid":
        fam = ProblemFamily(name, ("t", "y"), (0.0, 0.5), (5.0, 3.0), SpatialGrid(-1.0, 4.0, 2000))
    elif name == "burgers_viscous":
        fam = ProblemFamily(name, ("t", "y", "nu"), (0.0, 0.5, 5e-5), (3.0, 3.0, 0.1),
                            SpatialGrid(-3.0, 5.0, 1600),
                            settings={"solver": burgers_fv.BurgersSolverSettings()})
    elif name == "camassa_holm":
        fam = ProblemFamily(name, ("t", "q10"), (0.0, -2.0), (40.0, 2.0),
                            SpatialGrid(-25.0, 35.0, 6000),
                            settings={"peakons": camassa_holm.PeakonSettings()})
    elif name == "kdv":
        fam = ProblemFamily(name, ("t", "k2"), (0.0, 16.0), (2.5e-3, 22.0),
                            SpatialGrid(-1.0, 2.0, 4000))
    else:
        raise ValueError(f"unknown family {name!r}; choose from {sorted(_GENERATORS)}")
    if settings:
        fam = replace(fam, settings={**fam.settings, **settings})
    return fam.with_grids(n_cells, n_quad, domain)


FAMILY_NAMES = tuple(_GENERATORS)


# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SnapshotSet:
    """Snapshots of one family, stored row-wise.

    ``densities`` are normalized (unit mass); ``masses`` holds the physical
    total masses; ``wallclock`` the generation time of each snapshot in
    seconds.
    """

    family: ProblemFamily
    params: np.ndarray
    densities: np.ndarray
    masses: np.ndarray
    icdfs: np.ndarray
    wallclock: np.ndarray
    seed: int | None = None

    def __len__(self):
        return len(self.params)

    def measure(self, i) -> DiscreteMeasure:
        return DiscreteMeasure(self.family.grid, self.densities[i], self.masses[i])

    def quantile(self, i) -> QuantileFunction:
        return QuantileFunction(self.family.qgrid, self.icdfs[i], self.family.domain)

    def point(self, i) -> ParameterPoint:
        return self.family.point(self.params[i])

    def __getitem__(self, i):
        return self.point(i), self.measure(i), self.quantile(i)

    def subset(self, idx) -> SnapshotSet:
        idx = np.asarray(idx)
        return SnapshotSet(self.family, self.params[idx], self.densities[idx],
                           self.masses[idx], self.icdfs[idx], self.wallclock[idx], self.seed)

    @property
    def physical_densities(self):
        return self.densities * self.masses[:, None]


def _timed_snapshot(args):
    fam, z = args
    t0 = time.perf_counter()
    m, f = fam.snapshot(z)
    return m.density, m.mass, f.values, time.perf_counter() - t0


def generate_snapshots(family: ProblemFamily, params, seed=None, workers: int = 1) -> SnapshotSet:
    params = np.atleast_2d(np.asarray(params, dtype=float))
    for z in params:
        family.check(z)
    jobs = [(family, z) for z in params]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            out = list(ex.map(_timed_snapshot, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        out = [_timed_snapshot(j) for j in jobs]
    dens, mass, icdf, wall = zip(*out) if out else ((), (), (), ())
    return SnapshotSet(family, params, np.array(dens), np.array(mass), np.array(icdf),
                       np.array(wall), seed)


def sample_training_set(family: ProblemFamily, count: int, seed, workers: int = 1) -> SnapshotSet:
    """``count`` snapshots at parameters drawn i.i.d. uniformly from the box."""
    if count < 2:
        raise ValueError("a training set needs at least 2 snapshots")
    return generate_snapshots(family, family.sample(count, seed), seed, workers)


# single-snapshot entry points ---------------------------------------------


def transport_snapshot(y, family: ProblemFamily | None = None):
    return (family or make_family("transport")).snapshot([y])


def burgers_inviscid_snapshot(y, t, family: ProblemFamily | None = None):
    return (family or make_family("burgers_inviscid")).snapshot([t, y])


def burgers_viscous_solve(y, nu, t_end, save_times=None, grid: SpatialGrid | None = None,
                          settings=burgers_fv.BurgersSolverSettings()):
    """Trajectory of normalized measures at ``save_times`` (default: ``t_end``)."""
    fam = make_family("burgers_viscous")
    grid = grid or fam.grid
    fam.check([t_end, y, nu])
    frames = burgers_fv.solve(grid, y, nu, t_end, save_times, settings)
    return [DiscreteMeasure.from_density(grid, u, clip_negative=1e-10 * max(1.0, np.abs(u).max()))
            for u in frames]


def camassa_holm_snapshot(q10, t, family: ProblemFamily | None = None) -> DiscreteMeasure:
    return (family or make_family("camassa_holm")).snapshot([t, q10])[0]


def kdv_snapshot(k2, t, family: ProblemFamily | None = None) -> DiscreteMeasure:
    return (family or make_family("kdv")).snapshot([t, k2])[0]
