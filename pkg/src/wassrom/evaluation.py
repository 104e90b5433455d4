"""Test-set evaluation of the reduced models in L2, W2 and H^-1."""
from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field

import numpy as np

from .gbar import GbarDictionary, gbar_interpolate, gbar_project
from .measure import QuantileFunction, icdf_to_measure
from .metrics import FemMesh, hminus1_norm
from .pca import PcaModel, pca_coefficients
from .rbf import InterpSettings
from .tpca import TpcaModel, tpca_interpolate, tpca_project

MODEL_NAMES = ("pca", "tpca_proj", "tpca_interp", "gbar_proj", "gbar_interp")
METRICS = ("l2", "w2", "hm1")
CSV_COLUMNS = ("model", "metric", "n", "e_av", "e_wc", "runtime_ratio_mean",
               "runtime_ratio_median")


@dataclass(frozen=True, eq=False)
class ModelSuite:
    pca: PcaModel | None = None
    tpca: TpcaModel | None = None
    gbar: GbarDictionary | None = None
    interp: InterpSettings = InterpSettings()
    policy: str = "rearrange"

    def available(self):
        out = []
        if self.pca is not None:
            out.append("pca")
        if self.tpca is not None:
            out += ["tpca_proj", "tpca_interp"]
        if self.gbar is not None:
            out += ["gbar_proj", "gbar_interp"]
        return out

    def max_rank(self, name) -> int:
        if name == "pca":
            return self.pca.rank
        if name.startswith("tpca"):
            return self.tpca.rank
        return self.gbar.size

    def online(self, name, n, quantile: QuantileFunction, density, z):
        """Reduced approximation of one target.

        Returns ``(physical density, quantile or None, reconstruction or None)``;
        the density is signed for PCA.
        """
        if name == "pca":
            c = pca_coefficients(self.pca, density)
            return self.pca.reconstruct(c, n), None, None
        if name == "tpca_proj":
            rec = tpca_project(self.tpca, quantile, n, self.policy)
        elif name == "tpca_interp":
            rec = tpca_interpolate(self.tpca, z, n, self.interp, self.policy)
        elif name == "gbar_proj":
            rec = gbar_project(self.gbar, quantile, n)
        elif name == "gbar_interp":
            rec = gbar_interpolate(self.gbar, z, n, self.interp)
        else:
            raise ValueError(f"unknown model {name!r}")
        return None, rec.quantile, rec


@dataclass(eq=False)
class ErrorReport:
    """``errors[(model, metric)]`` is (n_samples, n_ranks), NaN where a rank
    is unavailable or the metric undefined (W2 of signed PCA output)."""

    models: tuple
    metrics: tuple
    ranks: tuple
    errors: dict
    runtimes: dict = field(default_factory=dict)     # model -> (n_samples, n_ranks) s
    hf_runtime: np.ndarray | None = None
    params: np.ndarray | None = None
    repairs: dict = field(default_factory=dict)      # model -> (n_ranks,) counts
    invalid: dict = field(default_factory=dict)      # model -> (n_ranks,) counts

    def e_av(self, model, metric):
        """Root-mean-square error over the test set, per rank."""
        e = self.errors[(model, metric)]
        with np.errstate(invalid="ignore"):
            return np.sqrt(np.mean(e * e, axis=0))

    def e_wc(self, model, metric):
        return np.max(self.errors[(model, metric)], axis=0)

    def runtime_ratios(self, model):
        if model not in self.runtimes or self.hf_runtime is None:
            return None
        return self.runtimes[model] / self.hf_runtime[:, None]

    def rows(self, timing=False):
        for model in self.models:
            ratios = self.runtime_ratios(model) if timing else None
            for metric in self.metrics:
                av, wc = self.e_av(model, metric), self.e_wc(model, metric)
                for k, n in enumerate(self.ranks):
                    if not np.isfinite(av[k]):
                        continue
                    rm = rmed = ""
                    if ratios is not None:
                        rm = f"{np.mean(ratios[:, k]):.6e}"
                        rmed = f"{np.median(ratios[:, k]):.6e}"
                    yield (model, metric, n, f"{av[k]:.12e}", f"{wc[k]:.12e}", rm, rmed)

    def to_csv(self, path=None, timing=False, header_comment=None):
        buf = io.StringIO()
        if header_comment:
            buf.write(f"# {header_comment}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        w.writerows(self.rows(timing))
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def _timed(fn, repeats):
    best = []
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best.append(time.perf_counter() - t0)
    return out, float(np.median(best))


def evaluate_suite(suite: ModelSuite, test_set, ranks, metrics=METRICS, models=None,
                   fem_h: float = 1e-3, timing: bool = False, repeats: int = 3) -> ErrorReport:
    """Errors of each model at each rank on every snapshot of ``test_set``.

    L2 and H^-1 compare physical densities on the test grid; W2 compares
    probability icdfs.  With ``timing`` the online cost (reduced evaluation
    plus density reconstruction, median of ``repeats``) is recorded.
    """
    fam = test_set.family
    grid = fam.grid
    mesh = FemMesh.for_grid(grid, fem_h)
    models = tuple(models or suite.available())
    ranks = tuple(int(n) for n in ranks)
    N, R = len(test_set), len(ranks)
    errors = {(m, k): np.full((N, R), np.nan) for m in models for k in metrics}
    runtimes = {m: np.full((N, R), np.nan) for m in models} if timing else {}
    repairs = {m: np.zeros(R, dtype=int) for m in models}
    invalid = {m: np.zeros(R, dtype=int) for m in models}
    truth_dens = test_set.physical_densities

    for i in range(N):
        q_true = test_set.quantile(i)
        rho = truth_dens[i]
        z = test_set.params[i]
        for m in models:
            top = suite.max_rank(m)
            for k, n in enumerate(ranks):
                if n > top or (n < 1 and m.startswith("gbar")):
                    continue

                def run():
                    dens, q, rec = suite.online(m, n, q_true, rho, z)
                    if dens is None:
                        dens = icdf_to_measure(q, grid, mass=rec.mass).physical_density
                    return dens, q, rec

                if timing:
                    (dens, q, rec), dt = _timed(run, repeats)
                    runtimes[m][i, k] = dt
                else:
                    dens, q, rec = run()
                if rec is not None:
                    repairs[m][k] += int(rec.repaired)
                    invalid[m][k] += int(not rec.quantile.is_valid())
                diff = dens - rho
                if "l2" in metrics:
                    errors[(m, "l2")][i, k] = np.sqrt(np.sum(diff * diff) * grid.dx)
                if "hm1" in metrics:
                    errors[(m, "hm1")][i, k] = hminus1_norm(grid, diff, mesh)
                if "w2" in metrics and q is not None:
                    errors[(m, "w2")][i, k] = fam.qgrid.norm(q.values - q_true.values)

    return ErrorReport(models, tuple(metrics), ranks, errors, runtimes,
                       np.asarray(test_set.wallclock) if timing else None,
                       np.asarray(test_set.params), repairs, invalid)
