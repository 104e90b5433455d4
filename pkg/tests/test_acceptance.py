"""End-to-end acceptance checks, one test per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see the criterion lines as
they complete; they are repeated in the terminal summary either way.
"""
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import spearmanr

from conftest import record
from oracles import simplex_grid_search, w2_monotone_coupling
from wassrom.evaluation import ModelSuite, evaluate_suite
from wassrom.experiment import runner
from wassrom.experiment.config import load_config
from wassrom.gbar import gbar_fit, gbar_interpolate, gbar_project
from wassrom.measure import (DiscreteMeasure, QuantileGrid, SpatialGrid, cdf_to_icdf,
                             w2_distance)
from wassrom.metrics import FemMesh, hminus1_norm
from wassrom.pca import pca_fit, pca_project
from wassrom.qp import kkt_residual, simplex_least_squares, solve_simplex_qp
from wassrom.rbf import InterpSettings
from wassrom.snapshots import (FAMILY_NAMES, camassa_holm, generate_snapshots, kdv_snapshot,
                               make_family, sample_training_set)
from wassrom.tpca import flat_projection_errors, tpca_fit, tpca_project

pytestmark = pytest.mark.slow

# sizes and seeds follow configs/*.ini
SETUPS = {
    "transport": dict(n_train=200, train_seed=11, n_test=100, test_seed=12),
    "burgers_inviscid": dict(n_train=1000, train_seed=21, n_test=500, test_seed=22),
    "burgers_viscous": dict(n_train=500, train_seed=31, n_test=200, test_seed=32),
    "camassa_holm": dict(n_train=1000, train_seed=41, n_test=500, test_seed=42),
    "kdv": dict(n_train=1000, train_seed=51, n_test=500, test_seed=52),
}
_CACHE = {}


def dataset(name):
    if name not in _CACHE:
        s = SETUPS[name]
        fam = make_family(name)
        train = sample_training_set(fam, s["n_train"], s["train_seed"])
        test = generate_snapshots(fam, fam.sample(s["n_test"], s["test_seed"]), s["test_seed"])
        _CACHE[name] = (train, test)
    return _CACHE[name]


def slope(n, v):
    return float(np.polyfit(np.log(n), np.log(v), 1)[0])


def test_criterion_01_transport_exactness():
    t0 = time.perf_counter()
    fam = make_family("transport")
    train = sample_training_set(fam, 200, 11)
    test = generate_snapshots(fam, fam.sample(100, 12))
    m = tpca_fit(train)
    ratio = m.sigma[1] / m.sigma[0]
    err = max(w2_distance(tpca_project(m, test.quantile(i), 1).quantile, test.quantile(i))
              for i in range(len(test)))
    elapsed = time.perf_counter() - t0
    ok = ratio < 1e-8 and err < 1e-6 and elapsed < 10
    record(1, ok, f"sigma2/sigma1 = {ratio:.2e} (< 1e-8), max W2 test error at n=1 = {err:.2e} "
                  f"(< 1e-6), {elapsed:.1f} s (< 10 s)")
    assert ok


def test_criterion_02_transport_linear_lower_bound():
    t0 = time.perf_counter()
    fam = make_family("transport")
    train = sample_training_set(fam, 200, 11)
    m = pca_fit(train)
    n = np.arange(5, 51)
    eig_slope = slope(n, m.sigma[n - 1] ** 2)
    sv_slope = slope(n, m.sigma[n - 1])
    err_slope = slope(n, np.sqrt([m.tail(k) for k in n]))
    elapsed = time.perf_counter() - t0
    ok = -2.4 <= eig_slope <= -1.6 and err_slope >= -0.7 and elapsed < 30
    record(2, ok, f"correlation eigenvalue slope = {eig_slope:.2f} (-2 +- 0.4; raw singular "
                  f"values {sv_slope:.2f}), PCA training error slope = {err_slope:.2f} (>= -0.7), "
                  f"{elapsed:.1f} s (< 30 s)")
    assert ok


def test_criterion_03_burgers_tangent_decay():
    t0 = time.perf_counter()
    fam = make_family("burgers_inviscid")
    train = sample_training_set(fam, 1000, 21)
    t, p = tpca_fit(train), pca_fit(train)
    n = np.arange(4, 31)
    s = slope(n, np.sqrt([t.tail(k) for k in n]))
    factor = np.sqrt(p.tail(10) / t.tail(10))
    elapsed = time.perf_counter() - t0
    ok = s <= -1.5 and factor >= 10 and elapsed < 300
    record(3, ok, f"tPCA training error slope = {s:.2f} (<= -1.5), PCA/tPCA error at n=10 = "
                  f"{factor:.0f} (>= 10), {elapsed:.1f} s (< 300 s)")
    assert ok


def test_criterion_04_tail_identity():
    worst = 0.0
    for name in FAMILY_NAMES:
        fam = make_family(name)
        train = sample_training_set(fam, 120, 4)
        p, t = pca_fit(train), tpca_fit(train)
        X = train.physical_densities
        floor_p = 1e-14 * p.tail(0)
        floor_t = 1e-14 * t.tail(0)
        for n in (0, 1, 2, 5, 10, 20, 50):
            rec = np.array([pca_project(p, x, n) for x in X])
            mse = np.mean(np.sum((rec - X) ** 2, axis=1) * fam.grid.dx)
            worst = max(worst, abs(mse - p.tail(n)) / max(p.tail(n), floor_p))
            fe = flat_projection_errors(t, train.icdfs, n)
            worst = max(worst, abs(np.mean(fe ** 2) - t.tail(n)) / max(t.tail(n), floor_t))
    ok = worst <= 1e-10
    record(4, ok, f"max relative gap between mean squared training error and sigma tail over "
                  f"{len(FAMILY_NAMES)} families, PCA and tPCA = {worst:.1e} (<= 1e-10)")
    assert ok


def test_criterion_05_w2_oracle():
    rng = np.random.default_rng(5)
    fine, coarse = QuantileGrid(16384), QuantileGrid(1024)
    worst = worst_coarse = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 65))
        g = SpatialGrid(float(rng.uniform(-2, 0)), float(rng.uniform(1, 3)), n)
        a = DiscreteMeasure.from_density(g, rng.random(n) + 0.05)
        b = DiscreteMeasure.from_density(g, rng.random(n) + 0.05)
        exact = w2_monotone_coupling(g.edges, a.density, b.density)
        for q, acc in ((fine, "f"), (coarse, "c")):
            rel = abs(w2_distance(cdf_to_icdf(a, q), cdf_to_icdf(b, q)) - exact) / exact
            if acc == "f":
                worst = max(worst, rel)
            else:
                worst_coarse = max(worst_coarse, rel)
    ok = worst <= 1e-6
    record(5, ok, f"100 pairs on <= 64 cells: max relative W2 gap to monotone coupling = "
                  f"{worst:.1e} at n_quad=16384 (<= 1e-6); {worst_coarse:.1e} at n_quad=1024")
    assert ok


def test_criterion_06_barycenter_qp():
    train, _ = dataset("burgers_inviscid")
    rng = np.random.default_rng(6)
    w = train.family.qgrid.weight
    # recovery is only defined for a nonsingular Gram matrix: draw the
    # dictionaries from greedily selected members, which are far from
    # affinely dependent, and report the worst conditioning seen
    members = gbar_fit(train, 8).icdfs
    rec_err = kkt = ext = 0.0
    worst_cond = 0.0
    for _ in range(50):
        k = int(rng.integers(2, 8))
        A = members[rng.choice(len(members), k, replace=False)]
        worst_cond = max(worst_cond, np.linalg.cond(w * A @ A.T))
        lam = rng.dirichlet(np.ones(k))
        x, _ = simplex_least_squares(A, lam @ A, weight=w)
        rec_err = max(rec_err, np.abs(x - lam).max())
        b = train.icdfs[rng.integers(len(train))]
        G, c = w * A @ A.T, w * A @ b
        y, _ = solve_simplex_qp(G, c)
        kkt = max(kkt, *kkt_residual(G, c, y))
    for _ in range(30):
        A = train.icdfs[rng.choice(len(train), 2, replace=False)]
        b = train.icdfs[rng.integers(len(train))]
        _, res = simplex_least_squares(A, b, weight=w)
        _, res_grid = simplex_grid_search(A, b)
        ext = max(ext, abs(res - res_grid))
    ok = rec_err <= 1e-6 and kkt <= 1e-8 and ext <= 1e-3
    record(6, ok, f"lambda recovery {rec_err:.1e} (<= 1e-6, Gram condition <= {worst_cond:.0e}), KKT residual {kkt:.1e} (<= 1e-8), "
                  f"hull-exterior residual vs grid search {ext:.1e} (<= 1e-3)")
    assert ok


def test_criterion_07_gbar_stability():
    settings = InterpSettings()
    total = invalid = 0
    for name in FAMILY_NAMES:
        train, test = dataset(name)
        d = gbar_fit(train, 20)
        for i in range(len(test)):
            for n in range(1, d.size + 1):
                for rec in (gbar_project(d, test.quantile(i), n),
                            gbar_interpolate(d, test.params[i], n, settings)):
                    total += 1
                    invalid += not rec.quantile.is_valid()
    ok = invalid == 0
    record(7, ok, f"{invalid} invalid gBar reconstructions out of {total} (projection and "
                  f"interpolation, all ranks, {len(FAMILY_NAMES)} families)")
    assert ok


def test_criterion_08_hminus1_oracle():
    g = SpatialGrid(0.0, 1.0, 8000)
    e = g.edges
    f = (np.cos(np.pi * e[:-1]) - np.cos(np.pi * e[1:])) / (np.pi * g.dx)
    exact = 1 / (np.pi * np.sqrt(2))
    hs = (4e-3, 2e-3, 1e-3, 5e-4)
    gaps = [abs(hminus1_norm(g, f, FemMesh(0.0, 1.0, h)) - exact) for h in hs]
    rel = gaps[2] / exact
    mono = all(a > b for a, b in zip(gaps, gaps[1:]))
    ok = rel <= 0.01 and mono
    record(8, ok, f"relative gap at h=1e-3 = {rel:.1e} (<= 1e-2), gaps for h = {hs}: "
                  + ", ".join(f"{x:.1e}" for x in gaps) + (" decreasing" if mono else " NOT decreasing"))
    assert ok


def test_criterion_09_camassa_holm_conservation():
    rng = np.random.default_rng(9)
    s = camassa_holm.PeakonSettings()
    ts = np.linspace(0, 40, 401)
    drift_h = drift_p = 0.0
    for q10 in rng.uniform(-2, 2, 20):
        q, p = camassa_holm.integrate(q10, 40.0, s, t_eval=ts)
        h = np.array([camassa_holm.hamiltonian(q[:, i], p[:, i], s.alpha) for i in range(len(ts))])
        drift_h = max(drift_h, np.abs(h / h[0] - 1).max())
        mom = p.sum(axis=0)
        drift_p = max(drift_p, np.abs(mom / mom[0] - 1).max())
    ok = drift_h <= 1e-8 and drift_p <= 1e-8
    record(9, ok, f"20 random q1(0): max Hamiltonian drift {drift_h:.1e}, momentum drift "
                  f"{drift_p:.1e} (<= 1e-8)")
    assert ok


def test_criterion_10_kdv_mass():
    worst = 0.0
    for k2 in np.linspace(16, 22, 5):
        for t in np.linspace(0, 2.5e-3, 5):
            worst = max(worst, abs(kdv_snapshot(k2, t).mass / 120 - 1))
    ok = worst <= 1e-3
    record(10, ok, f"max relative mass deviation from 120 on a 5x5 (k2, t) grid = {worst:.1e} "
                   f"(<= 1e-3)")
    assert ok


def test_criterion_11_viscous_runtime():
    train, test = dataset("burgers_viscous")
    suite = ModelSuite(tpca=tpca_fit(train), gbar=gbar_fit(train, 20))
    models = ("tpca_interp", "gbar_interp")
    rep = evaluate_suite(suite, test, (20,), ("w2",), models, timing=True, repeats=3)
    t = test.params[:, 0]
    hf = np.asarray(test.wallclock)
    rho_hf = spearmanr(t, hf).statistic
    parts, ok = [], rho_hf > 0.5
    for m in models:
        ratio = float(np.mean(rep.runtime_ratios(m)[:, 0]))
        on = rep.runtimes[m][:, 0]
        lo, hi = np.quantile(t, [1 / 3, 2 / 3])
        flat = float(np.median(on[t >= hi]) / np.median(on[t <= lo]))
        ok = ok and ratio < 0.1 and 0.5 <= flat <= 2.0
        parts.append(f"{m} mean ratio {ratio:.1e} (< 0.1), late/early online time {flat:.2f}")
    record(11, ok, "; ".join(parts) + f"; HF time vs t Spearman {rho_hf:.2f} (> 0.5)")
    assert ok


def test_criterion_12_training_size_sweep(tmp_path):
    t0 = time.perf_counter()
    cfg = load_config(Path(__file__).parent.parent / "configs" / "burgers.ini")
    cfg = replace(cfg, output=str(tmp_path))
    _, q = runner.run_size_sweep(cfg, tmp_path)
    elapsed = time.perf_counter() - t0
    sizes = sorted(cfg.sweep.sizes)
    ok = elapsed < 1200
    parts = []
    for m in ("tpca_interp", "gbar_interp"):
        flag = q[f"sweep.{m}.w2.nonincreasing"] == 1.0
        ok = ok and flag
        means = ", ".join(f"{q[f'sweep.{m}.w2.mean@{s}']:.2e}" for s in sizes)
        parts.append(f"{m} mean W2 at n=10 for sizes {sizes}: {means}"
                     f" ({'non-increasing' if flag else 'INCREASING'} within 2 SE)")
    record(12, ok, "; ".join(parts) + f"; {elapsed:.0f} s (< 1200 s)")
    assert ok


# module examples that reuse the cached viscous Burgers data -------------------


def test_viscous_gbar_interp_close_to_projection():
    train, test = dataset("burgers_viscous")
    suite = ModelSuite(gbar=gbar_fit(train, 20))
    ranks = (2, 5, 10, 20)
    rep = evaluate_suite(suite, test, ranks, ("w2",), ("gbar_proj", "gbar_interp"))
    ratio = [np.median(rep.errors[("gbar_interp", "w2")][:, k])
             / np.median(rep.errors[("gbar_proj", "w2")][:, k]) for k in range(len(ranks))]
    print("\nmedian W2 interp/proj by rank", dict(zip(ranks, np.round(ratio, 2))))
    assert all(r < 2 for r, n in zip(ratio, ranks) if n <= 10)


def test_viscous_tpca_repairs_occur():
    train, test = dataset("burgers_viscous")
    m = tpca_fit(train)
    counts = {n: sum(tpca_project(m, test.quantile(i), n).repaired for i in range(len(test)))
              for n in (1, 2, 3, 5, 10, 20)}
    print("\ntPCA repair events by rank", counts)
    assert sum(counts.values()) > 0


@pytest.mark.xfail(strict=True, reason="no repair events at n=10 at desk resolution")
def test_viscous_tpca_repairs_at_rank_10():
    train, test = dataset("burgers_viscous")
    m = tpca_fit(train)
    assert any(tpca_project(m, test.quantile(i), 10).repaired for i in range(len(test)))
