"""Experiment pipeline: snapshots, fits, error tables, sweeps, runtimes."""
from __future__ import annotations

import csv
import io
import json
import logging
import os
from dataclasses import replace
from pathlib import Path

import numpy as np
from scipy.stats import spearmanr

from .. import __version__
from ..errors import ConfigError
from ..evaluation import ModelSuite, evaluate_suite
from ..gbar import gbar_fit
from ..measure import icdf_to_measure
from ..pca import pca_fit
from ..snapshots import generate_snapshots, make_family, sample_training_set
from ..tpca import tpca_fit
from . import archive, plots
from .config import ExperimentConfig

log = logging.getLogger(__name__)

OUTPUT_ENV = "WASSROM_OUTPUT_ROOT"


def output_dir(cfg: ExperimentConfig) -> Path:
    if cfg.output:
        return Path(cfg.output)
    return Path(os.environ.get(OUTPUT_ENV, "runs")) / cfg.name


def family_of(cfg: ExperimentConfig):
    return make_family(cfg.family, n_cells=cfg.n_cells, n_quad=cfg.n_quad, domain=cfg.domain)


def provenance(cfg: ExperimentConfig, seed=None) -> str:
    seed = f"train:{cfg.train_seed},test:{cfg.test_seed}" if seed is None else seed
    return f"config={cfg.hash} seed={seed} version=wassrom-{__version__}"


def write_csv(path, header, rows, comment=None):
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    Path(path).write_text(buf.getvalue())


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12e}"
    return v


def update_quantities(out: Path, values: dict):
    path = out / "quantities.json"
    q = json.loads(path.read_text()) if path.exists() else {}
    q.update({k: float(v) for k, v in values.items()})
    path.write_text(json.dumps(q, indent=2, sort_keys=True) + "\n")
    return q


def log_slope(n, values):
    n = np.asarray(n, dtype=float)
    v = np.asarray(values, dtype=float)
    return float(np.polyfit(np.log(n), np.log(v), 1)[0])


# --------------------------------------------------------------------------
# stages


def generate(cfg: ExperimentConfig, out: Path | None = None):
    """Sample training and test snapshots and archive them."""
    out = out or output_dir(cfg)
    fam = family_of(cfg)
    train = sample_training_set(fam, cfg.n_train, cfg.train_seed, cfg.workers)
    test = generate_snapshots(fam, fam.sample(cfg.n_test, cfg.test_seed), cfg.test_seed,
                              cfg.workers)
    extra = {"config_hash": cfg.hash}
    archive.save_snapshots(out / "snapshots" / "train", train, extra)
    if test is not None:
        archive.save_snapshots(out / "snapshots" / "test", test, extra)
    archive.write_json(out / "manifest.json", {
        "config": cfg.to_dict(), "config_hash": cfg.hash, "version": __version__,
        "family": archive.family_manifest(fam)})
    return train, test


def load_or_generate(cfg: ExperimentConfig, out: Path):
    man = out / "snapshots" / "train" / "manifest.json"
    if man.exists() and archive.read_json(man).get("config_hash") == cfg.hash:
        train = archive.load_snapshots(out / "snapshots" / "train")
        tdir = out / "snapshots" / "test"
        test = archive.load_snapshots(tdir) if (tdir / "manifest.json").exists() else None
        return train, test
    return generate(cfg, out)


def fit(cfg: ExperimentConfig, train, out: Path | None = None, models=None) -> ModelSuite:
    models = tuple(models or cfg.models)
    pca = pca_fit(train, center=cfg.center_pca) if "pca" in models else None
    tp = tpca_fit(train, cfg.policy) if any(m.startswith("tpca") for m in models) else None
    gb = gbar_fit(train, cfg.n_max, cfg.gbar_eps) if any(m.startswith("gbar") for m in models) \
        else None
    suite = ModelSuite(pca, tp, gb, cfg.interp, cfg.policy)
    if out is not None:
        d = out / "models"
        if pca is not None:
            archive.save_pca(d, pca)
        if tp is not None:
            archive.save_tpca(d, tp)
        if gb is not None:
            archive.save_gbar(d, gb)
        write_decay_tables(cfg, suite, out)
    return suite


def load_suite(cfg: ExperimentConfig, out: Path) -> ModelSuite:
    d = out / "models"
    pca = archive.load_pca(d) if (d / "pca.json").exists() else None
    tp = archive.load_tpca(d) if (d / "tpca.json").exists() else None
    gb = archive.load_gbar(d) if (d / "gbar.json").exists() else None
    if pca is None and tp is None and gb is None:
        raise FileNotFoundError(f"no fitted models under {d}; run `fit` first")
    return ModelSuite(pca, tp, gb, cfg.interp, cfg.policy)


def decay_quantities(suite: ModelSuite) -> dict:
    q = {}
    for name, model in (("pca", suite.pca), ("tpca", suite.tpca)):
        if model is None or model.rank < 2:
            continue
        q[f"{name}.sigma_ratio"] = model.sigma[1] / model.sigma[0]
        for a, b in ((4, 30), (5, 50)):
            if model.rank > b:
                n = np.arange(a, b + 1)
                err = np.sqrt([model.tail(k) for k in n])
                q[f"{name}.train_slope@{a}-{b}"] = log_slope(n, err)
                q[f"{name}.sigma_slope@{a}-{b}"] = log_slope(n, model.sigma[n - 1])
                q[f"{name}.sigma2_slope@{a}-{b}"] = log_slope(n, model.sigma[n - 1] ** 2)
        for n in (1, 2, 5, 10, 20):
            if n <= model.rank:
                q[f"{name}.train_error@{n}"] = np.sqrt(model.tail(n))
    if suite.gbar is not None:
        q["gbar.history_increase"] = float(np.max(np.diff(suite.gbar.history), initial=0.0))
    return q


def write_decay_tables(cfg, suite, out):
    out.mkdir(parents=True, exist_ok=True)
    curves = {}
    for name, model in (("pca", suite.pca), ("tpca", suite.tpca)):
        if model is None:
            continue
        top = min(model.rank, cfg.decay_max)
        n = np.arange(1, top + 1)
        err = np.sqrt([model.tail(k) for k in n])
        s1 = model.sigma[0] if model.sigma[0] > 0 else 1.0
        rows = [(int(k), _fmt(model.sigma[k - 1]), _fmt(model.sigma[k - 1] / s1), _fmt(e))
                for k, e in zip(n, err)]
        write_csv(out / f"decay_{name}.csv", ("n", "sigma", "sigma_ratio", "train_error"),
                  rows, provenance(cfg))
        curves[f"{name} (training, {'L2' if name == 'pca' else 'W2'})"] = (n, err)
    if suite.gbar is not None:
        h = suite.gbar.history
        write_csv(out / "gbar_history.csv", ("n", "index", "max_residual"),
                  [(k + 1, int(i), _fmt(r)) for k, (i, r) in enumerate(zip(suite.gbar.indices, h))],
                  provenance(cfg))
        curves["gBar greedy max residual (W2)"] = (np.arange(1, len(h) + 1), h)
    (out / "plots").mkdir(exist_ok=True)
    plots.decay_plot(out / "plots" / "decay.svg", curves, f"{cfg.family}: training decay")
    update_quantities(out, decay_quantities(suite))


def report_quantities(report, prefix="") -> dict:
    q = {}
    for m in report.models:
        for metric in report.metrics:
            av, wc = report.e_av(m, metric), report.e_wc(m, metric)
            for k, n in enumerate(report.ranks):
                if np.isfinite(av[k]):
                    q[f"{prefix}{m}.{metric}.e_av@{n}"] = av[k]
                    q[f"{prefix}{m}.{metric}.e_wc@{n}"] = wc[k]
                    e = report.errors[(m, metric)][:, k]
                    q[f"{prefix}{m}.{metric}.e_median@{n}"] = np.median(e)
        q[f"{prefix}{m}.invalid"] = int(report.invalid[m].sum())
        q[f"{prefix}{m}.repairs"] = int(report.repairs[m].sum())
    return q


def evaluate(cfg: ExperimentConfig, suite: ModelSuite, test, out: Path):
    models = [m for m in cfg.models if m in suite.available()]
    report = evaluate_suite(suite, test, cfg.ranks, cfg.metrics, models, cfg.fem_h)
    report.to_csv(out / "errors.csv", header_comment=provenance(cfg))
    (out / "plots").mkdir(parents=True, exist_ok=True)
    for metric in cfg.metrics:
        curves = {}
        for m in report.models:
            av = report.e_av(m, metric)
            ok = np.isfinite(av)
            if ok.any():
                curves[f"{m} (average)"] = (np.array(report.ranks)[ok], av[ok])
        if curves:
            plots.decay_plot(out / "plots" / f"errors_{metric}.svg", curves,
                             f"{cfg.family}: test error ({metric})")
    dump_reconstructions(cfg, suite, test, out, models)
    update_quantities(out, report_quantities(report))
    return report


def dump_reconstructions(cfg, suite, test, out, models):
    i = min(cfg.dump_index, len(test) - 1)
    grid = test.family.grid
    truth = test.physical_densities[i]
    q = test.quantile(i)
    d = out / "reconstructions"
    d.mkdir(parents=True, exist_ok=True)
    for n in cfg.dump_ranks:
        cols, names = [grid.centers, truth], ["x", "exact"]
        for m in models:
            if n > suite.max_rank(m) or (n < 1 and m.startswith("gbar")):
                continue
            dens, qf, rec = suite.online(m, n, q, truth, test.params[i])
            if dens is None:
                dens = icdf_to_measure(qf, grid, mass=rec.mass).physical_density
            cols.append(dens)
            names.append(m)
        rows = [[_fmt(v) for v in r] for r in np.column_stack(cols)]
        write_csv(d / f"reconstruction_n{n}.csv", names, rows,
                  provenance(cfg) + f" test_index={i} params={list(test.params[i])}")
        plots.reconstruction_plot(out / "plots" / f"reconstruction_n{n}.svg", grid.centers, truth,
                                  dict(zip(names[2:], cols[2:])), f"{cfg.family}, n = {n}")


def run_experiment(cfg: ExperimentConfig, out: Path | None = None):
    """Generate, fit and evaluate; returns the archive directory."""
    out = out or output_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)
    train, test = load_or_generate(cfg, out)
    suite = fit(cfg, train, out)
    if test is not None:
        evaluate(cfg, suite, test, out)
    return out


# --------------------------------------------------------------------------
# training-set-size sweep


def sweep_seed(cfg, size, realization) -> int:
    return int(np.random.SeedSequence([cfg.train_seed, size, realization]).generate_state(1)[0])


def run_size_sweep(cfg: ExperimentConfig, out: Path | None = None):
    """Mean over realizations of test errors versus training-set size."""
    out = out or output_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)
    sw = cfg.sweep
    fam = family_of(cfg)
    tdir = out / "snapshots" / "test"
    if (tdir / "manifest.json").exists() and \
            archive.read_json(tdir / "manifest.json").get("config_hash") == cfg.hash:
        test = archive.load_snapshots(tdir)
    else:
        test = generate_snapshots(fam, fam.sample(cfg.n_test, cfg.test_seed), cfg.test_seed,
                                  cfg.workers)
    sub = replace(cfg, n_max=max(sw.rank, 1), models=sw.models, metrics=sw.metrics)
    stats = {}   # (size, model, metric) -> arrays over realizations
    for size in sw.sizes:
        for r in range(sw.realizations):
            train = sample_training_set(fam, size, sweep_seed(cfg, size, r), cfg.workers)
            suite = fit(sub, train, None, sw.models)
            rep = evaluate_suite(suite, test, (sw.rank,), sw.metrics, sw.models, cfg.fem_h)
            for m in sw.models:
                for metric in sw.metrics:
                    e = rep.errors[(m, metric)][:, 0]
                    s = stats.setdefault((size, m, metric), {"av": [], "wc": [], "mean": []})
                    s["av"].append(float(np.sqrt(np.mean(e * e))))
                    s["wc"].append(float(np.max(e)))
                    s["mean"].append(float(np.mean(e)))
            log.info("sweep size %d realization %d done", size, r)
    rows, q = [], {}
    for (size, m, metric), s in sorted(stats.items(), key=lambda kv: (kv[0][1], kv[0][2], kv[0][0])):
        mean = np.array(s["mean"])
        se = float(mean.std(ddof=1) / np.sqrt(len(mean))) if len(mean) > 1 else 0.0
        rows.append((size, m, metric, sw.rank, len(mean), _fmt(np.mean(s["av"])),
                     _fmt(np.mean(s["wc"])), _fmt(mean.mean()), _fmt(se)))
        q[f"sweep.{m}.{metric}.mean@{size}"] = mean.mean()
        q[f"sweep.{m}.{metric}.se@{size}"] = se
    for m in sw.models:
        for metric in sw.metrics:
            q.update(sweep_trend(q, m, metric, sw.sizes))
    write_csv(out / "sweep.csv", ("size", "model", "metric", "n", "realizations", "e_av_mean",
                                  "e_wc_mean", "e_mean_mean", "e_mean_se"),
              rows, provenance(cfg))
    update_quantities(out, q)
    return out / "sweep.csv", q


def sweep_trend(q, model, metric, sizes):
    """Non-increasing within two pooled standard errors, and the ratio of the
    smallest-size to largest-size mean error (size sensitivity)."""
    sizes = sorted(sizes)
    mean = [q[f"sweep.{model}.{metric}.mean@{s}"] for s in sizes]
    se = [q[f"sweep.{model}.{metric}.se@{s}"] for s in sizes]
    ok = all(b <= a + 2.0 * np.hypot(sa, sb)
             for a, b, sa, sb in zip(mean, mean[1:], se, se[1:]))
    return {f"sweep.{model}.{metric}.nonincreasing": float(ok),
            f"sweep.{model}.{metric}.sensitivity": mean[0] / mean[-1] if mean[-1] > 0 else np.inf}


# --------------------------------------------------------------------------
# runtimes


def _tercile_ratio(t, v):
    lo, hi = np.quantile(t, [1 / 3, 2 / 3])
    return float(np.median(v[t >= hi]) / np.median(v[t <= lo]))


def runtime_report(cfg: ExperimentConfig, out: Path | None = None):
    """Online/high-fidelity runtime ratios per model and rank (viscous Burgers)."""
    if cfg.family != "burgers_viscous":
        raise ConfigError("runtime reports need the burgers_viscous family, the only one "
                          "with a high-fidelity solver")
    out = out or output_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)
    train, test = load_or_generate(cfg, out)
    if (out / "models").exists():
        try:
            suite = load_suite(cfg, out)
        except FileNotFoundError:
            suite = fit(cfg, train, out)
    else:
        suite = fit(cfg, train, out)
    models = [m for m in cfg.models if m in suite.available() and m != "pca"]
    rep = evaluate_suite(suite, test, cfg.ranks, ("w2",), models, cfg.fem_h,
                         timing=True, repeats=cfg.timing_repeats)
    t = test.params[:, 0]
    hf = np.asarray(test.wallclock)
    rows, q = [], {}
    for m in models:
        ratios = rep.runtime_ratios(m)
        for k, n in enumerate(rep.ranks):
            r = ratios[:, k]
            if not np.all(np.isfinite(r)):
                continue
            on = rep.runtimes[m][:, k]
            rows.append((m, n, _fmt(np.mean(r)), _fmt(np.median(r)), _fmt(np.mean(on)),
                         _fmt(np.median(on)), _fmt(np.mean(hf))))
            q[f"runtime.{m}.ratio_mean@{n}"] = np.mean(r)
            q[f"runtime.{m}.ratio_median@{n}"] = np.median(r)
            q[f"runtime.{m}.t_tercile_ratio@{n}"] = _tercile_ratio(t, on)
        med = np.nanmedian(rep.runtimes[m], axis=0)
        med = med[np.isfinite(med)]
        if med.size:
            q[f"runtime.{m}.rank_spread"] = float(med.max() / med.min())
    q["runtime.hf.t_spearman"] = float(spearmanr(t, hf).statistic)
    q["runtime.hf.t_tercile_ratio"] = _tercile_ratio(t, hf)
    write_csv(out / "runtime.csv", ("model", "n", "ratio_mean", "ratio_median", "online_mean_s",
                                    "online_median_s", "hf_mean_s"), rows, provenance(cfg))
    top = rep.ranks[-1]
    k = len(rep.ranks) - 1
    header = ["index", *test.family.param_names, "hf_s"] + [f"{m}_s@{top}" for m in models]
    vt = [[i, *map(_fmt, test.params[i]), _fmt(hf[i])] + [_fmt(rep.runtimes[m][i, k]) for m in models]
          for i in np.argsort(t, kind="stable")]
    write_csv(out / "runtime_vs_t.csv", header, vt, provenance(cfg))
    plots.runtime_plot(out / "plots" / "runtime_vs_t.svg", t, hf,
                       {m: rep.runtimes[m][:, k] for m in models})
    update_quantities(out, q)
    return out / "runtime.csv", q


# --------------------------------------------------------------------------
# thresholds


def resolve(name: str, quantities: dict):
    """Value of a threshold key; ``a / b`` divides two quantities."""
    if "/" in name:
        a, b = (p.strip() for p in name.split("/", 1))
        va, vb = resolve(a, quantities), resolve(b, quantities)
        if va is None or vb is None:
            return None
        return va / vb if vb != 0 else np.inf
    return quantities.get(name.strip())


def check_thresholds(cfg: ExperimentConfig, quantities: dict, require_all=False):
    """Rows ``(key, value, op, limit, status)``; status is pass/fail/missing."""
    rows = []
    for key, (op, limit) in sorted(cfg.thresholds.items()):
        v = resolve(key, quantities)
        if v is None:
            rows.append((key, "", op, limit, "missing" if require_all else "skipped"))
            continue
        if op == "in":
            ok = limit[0] <= v <= limit[1]
        else:
            ok = {"<": v < limit, "<=": v <= limit, ">": v > limit, ">=": v >= limit}[op]
        rows.append((key, v, op, limit, "pass" if ok else "fail"))
    return rows


def write_threshold_report(cfg, out, rows):
    write_csv(out / "thresholds.csv", ("quantity", "value", "op", "limit", "status"),
              [(k, _fmt(v) if v != "" else "", op, list(lim) if isinstance(lim, tuple) else lim, s)
               for k, v, op, lim, s in rows], provenance(cfg))
    return all(r[4] in ("pass", "skipped") for r in rows)
