"""On-disk archive: little-endian float64 ``.npy`` arrays plus JSON manifests."""
from __future__ import annotations

import json
from dataclasses import asdict, is_dataclass
from pathlib import Path

import numpy as np

from .. import __version__
from ..gbar import GbarDictionary
from ..measure import QuantileFunction, QuantileGrid, SpatialGrid
from ..pca import PcaModel
from ..snapshots import SnapshotSet, make_family
from ..tpca import TpcaModel


def _jsonable(obj):
    if is_dataclass(obj):
        return {k: _jsonable(v) for k, v in asdict(obj).items()}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def write_json(path, data):
    Path(path).write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


def save_array(path, a):
    np.save(path, np.ascontiguousarray(a, dtype="<f8"), allow_pickle=False)


def load_array(path):
    return np.load(path, allow_pickle=False)


def family_manifest(fam):
    return {
        "family": fam.name,
        "param_names": list(fam.param_names),
        "box": [list(fam.lower), list(fam.upper)],
        "grid": {"x_min": fam.grid.x_min, "x_max": fam.grid.x_max, "n_cells": fam.grid.n_cells},
        "n_quad": fam.qgrid.n_quad,
        "settings": _jsonable(fam.settings),
    }


def family_from_manifest(m):
    g = m["grid"]
    return make_family(m["family"], n_cells=g["n_cells"], n_quad=m["n_quad"],
                       domain=(g["x_min"], g["x_max"]))


_SNAPSHOT_ARRAYS = ("params", "densities", "masses", "icdfs", "wallclock")


def save_snapshots(directory, snaps: SnapshotSet, extra=None):
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for name in _SNAPSHOT_ARRAYS:
        save_array(d / f"{name}.npy", getattr(snaps, name))
    man = family_manifest(snaps.family)
    man.update(count=len(snaps), seed=snaps.seed, version=__version__,
               arrays={n: f"{n}.npy" for n in _SNAPSHOT_ARRAYS},
               deterministic_arrays=[n for n in _SNAPSHOT_ARRAYS if n != "wallclock"])
    if extra:
        man.update(extra)
    write_json(d / "manifest.json", man)


def load_snapshots(directory) -> SnapshotSet:
    d = Path(directory)
    man = read_json(d / "manifest.json")
    fam = family_from_manifest(man)
    arrays = {n: load_array(d / f"{n}.npy") for n in _SNAPSHOT_ARRAYS}
    return SnapshotSet(fam, seed=man.get("seed"), **arrays)


# models ---------------------------------------------------------------------


def save_pca(directory, model: PcaModel):
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for name in ("modes", "sigma", "coefficients", "mean"):
        save_array(d / f"pca_{name}.npy", getattr(model, name))
    g = model.grid
    write_json(d / "pca.json", {"grid": [g.x_min, g.x_max, g.n_cells], "centered": model.centered})


def load_pca(directory) -> PcaModel:
    d = Path(directory)
    man = read_json(d / "pca.json")
    arr = {n: load_array(d / f"pca_{n}.npy") for n in ("modes", "sigma", "coefficients", "mean")}
    return PcaModel(SpatialGrid(*man["grid"]), centered=man["centered"], **arr)


def save_tpca(directory, model: TpcaModel):
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    save_array(d / "tpca_reference.npy", model.reference.values)
    for name in ("modes", "sigma", "coefficients", "params", "lower", "upper"):
        save_array(d / f"tpca_{name}.npy", getattr(model, name))
    write_json(d / "tpca.json", {"n_quad": model.qgrid.n_quad, "domain": list(model.reference.domain),
                                 "mass": model.mass, "policy": model.policy})


def load_tpca(directory) -> TpcaModel:
    d = Path(directory)
    man = read_json(d / "tpca.json")
    ref = QuantileFunction(QuantileGrid(man["n_quad"]), load_array(d / "tpca_reference.npy"),
                           tuple(man["domain"]))
    arr = {n: load_array(d / f"tpca_{n}.npy")
           for n in ("modes", "sigma", "coefficients", "params", "lower", "upper")}
    return TpcaModel(ref, mass=man["mass"], policy=man["policy"], **arr)


def save_gbar(directory, g: GbarDictionary):
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for name in ("icdfs", "params", "history", "lower", "upper"):
        save_array(d / f"gbar_{name}.npy", getattr(g, name))
    save_array(d / "gbar_indices.npy", g.indices)
    for k, table in enumerate(g.weights, 1):
        save_array(d / f"gbar_weights_{k:03d}.npy", table)
    write_json(d / "gbar.json", {"n_quad": g.qgrid.n_quad, "domain": list(g.domain),
                                 "mass": g.mass, "size": g.size})


def load_gbar(directory) -> GbarDictionary:
    d = Path(directory)
    man = read_json(d / "gbar.json")
    arr = {n: load_array(d / f"gbar_{n}.npy") for n in ("icdfs", "params", "history", "lower", "upper")}
    weights = tuple(load_array(d / f"gbar_weights_{k:03d}.npy") for k in range(1, man["size"] + 1))
    return GbarDictionary(load_array(d / "gbar_indices.npy").astype(int), weights=weights,
                          qgrid=QuantileGrid(man["n_quad"]), domain=tuple(man["domain"]),
                          mass=man["mass"], **arr)
