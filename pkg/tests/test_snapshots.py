import numpy as np
import pytest

from oracles import sech2_soliton
from wassrom.errors import ParameterOutOfBoxError
from wassrom.measure import QuantileGrid, SpatialGrid, cdf_to_icdf, log_map, w2_distance
from wassrom.snapshots import (FAMILY_NAMES, burgers_inviscid_snapshot, burgers_viscous_solve,
                               camassa_holm_snapshot, generate_snapshots, kdv_snapshot,
                               make_family, sample_training_set, transport_snapshot)
from wassrom.snapshots import camassa_holm, kdv
from wassrom.snapshots.closed_form import burgers_icdf


def test_transport_examples():
    m, f = transport_snapshot(0.0)
    g = m.grid
    expected = ((g.centers > -1) & (g.centers < 0)).astype(float)
    assert np.allclose(m.density, expected, atol=1e-12)
    q = QuantileGrid(2)
    assert np.allclose(transport_snapshot(1.0, make_family("transport", n_quad=2))[1].values,
                       q.nodes)
    _, a = transport_snapshot(0.3)
    _, b = transport_snapshot(0.7)
    assert np.allclose(log_map(b, a).values, 0.4, atol=1e-14)


def test_transport_icdf_matches_numerical_inverse():
    m, f = transport_snapshot(0.37)
    assert np.allclose(cdf_to_icdf(m).values, f.values, atol=1e-12)


def test_burgers_closed_form_values():
    s = np.array([0.25, 0.75])
    assert np.allclose(burgers_icdf(1.0, 1.0, s), [np.sqrt(0.5), 1.25])
    s = QuantileGrid(64).nodes
    assert np.allclose(burgers_icdf(2.0, 1e-12, s), s / 2, atol=1e-6)


def test_burgers_icdf_matches_numerical_inverse():
    for t, y in [(0.0, 1.0), (0.5, 2.0), (3.0, 0.7), (5.0, 3.0)]:
        m, f = burgers_inviscid_snapshot(y, t)
        assert w2_distance(cdf_to_icdf(m), f) <= 2 * m.grid.dx


def test_viscous_conserves_mass_and_smooths():
    (m,) = burgers_viscous_solve(1.0, 0.1, 3.0)
    assert m.mass == pytest.approx(1.0, abs=1e-12)
    assert np.abs(np.diff(m.density)).max() < 0.05


def test_viscous_low_nu_close_to_inviscid():
    (m,) = burgers_viscous_solve(1.0, 5e-5, 1.0)
    _, f = burgers_inviscid_snapshot(1.0, 1.0)
    assert w2_distance(cdf_to_icdf(m), f) <= 0.05


def test_viscous_second_order_in_space():
    q = QuantileGrid()

    def icdf(n):
        return cdf_to_icdf(burgers_viscous_solve(1.0, 0.1, 1.0, grid=SpatialGrid(-3, 5, n))[0], q)

    a, b, c = icdf(400), icdf(800), icdf(1600)
    assert 3.0 <= w2_distance(a, b) / w2_distance(b, c) <= 5.0


def test_viscous_trajectory_frames():
    frames = burgers_viscous_solve(1.0, 0.01, 1.0, save_times=[0.0, 0.5, 1.0])
    assert len(frames) == 3
    assert frames[0].density.max() == pytest.approx(1.0)


def test_camassa_holm_initial_profile():
    m = camassa_holm_snapshot(0.0, 0.0)
    x = m.grid.centers
    expected = 0.1 * np.exp(-np.abs(x)) + 0.4 * np.exp(-np.abs(x + 5))
    # cell averages vs point values: O(dx^2) away from the kinks
    assert np.allclose(m.physical_density, expected, atol=2e-4)


def test_camassa_holm_conservation():
    s = camassa_holm.PeakonSettings()
    ts = np.linspace(0, 40, 81)
    q, p = camassa_holm.integrate(0.7, 40.0, s, t_eval=ts)
    h = np.array([camassa_holm.hamiltonian(q[:, i], p[:, i]) for i in range(len(ts))])
    assert np.abs(h / h[0] - 1).max() <= 1e-8
    assert np.abs(p.sum(axis=0) / p[:, 0].sum() - 1).max() <= 1e-8


def test_kdv_mass():
    for k2 in (16.0, 19.0, 22.0):
        for t in (0.0, 2.5e-3):
            assert kdv_snapshot(k2, t).mass == pytest.approx(120.0, rel=1e-3)


def test_kdv_single_soliton_reduction():
    x = np.linspace(-1, 2, 3001)
    for t in (0.0, 1e-3):
        rho = kdv.density(x, t, k2=12.0, k1=10.0, c2=0.0)
        assert np.allclose(rho, sech2_soliton(x, t, 10.0, kdv.C1), atol=1e-9 * 200)
    avg = kdv.cell_averages(np.linspace(-1, 2, 3001), 0.0, k2=12.0, k1=10.0, c2=0.0)
    assert avg.sum() * 1e-3 == pytest.approx(40.0, rel=1e-6)


def test_kdv_nonnegative_dense_scan():
    x = np.linspace(-1, 2, 20001)
    for k2 in np.linspace(16, 22, 4):
        for t in np.linspace(0, 2.5e-3, 4):
            assert kdv.density(x, t, k2).min() >= -1e-9


def test_family_boxes_and_errors():
    for name in FAMILY_NAMES:
        fam = make_family(name)
        z = fam.sample(3, 0)
        assert z.shape == (3, fam.dim)
        with pytest.raises(ParameterOutOfBoxError):
            fam.check(np.asarray(fam.upper) + 1.0)
    with pytest.raises(ValueError):
        make_family("heat")


def test_sampling_deterministic_and_uniform():
    fam = make_family("burgers_inviscid")
    assert np.array_equal(fam.sample(50, 7), fam.sample(50, 7))
    assert not np.array_equal(fam.sample(50, 7), fam.sample(50, 8))
    count = 3000
    z = fam.normalize(fam.sample(count, 3))
    for j in range(fam.dim):
        counts = np.histogram(z[:, j], bins=3, range=(0, 1))[0]
        assert np.all(np.abs(counts - count / 3) <= 5 * np.sqrt(count))


def test_training_set_shapes_and_parallel_equivalence():
    fam = make_family("burgers_inviscid", n_cells=400, n_quad=128)
    a = sample_training_set(fam, 6, seed=5)
    b = sample_training_set(fam, 6, seed=5, workers=2)
    assert len(a) == 6 and a.densities.shape == (6, 400) and a.icdfs.shape == (6, 128)
    assert np.array_equal(a.densities, b.densities) and np.array_equal(a.icdfs, b.icdfs)
    assert np.all(a.wallclock > 0)
    with pytest.raises(ValueError):
        sample_training_set(fam, 1, seed=0)
    sub = a.subset([0, 2])
    assert len(sub) == 2 and np.array_equal(sub.params[1], a.params[2])


def test_generated_icdfs_are_valid():
    for name in FAMILY_NAMES:
        fam = make_family(name, n_cells=600 if name != "camassa_holm" else 3000)
        s = generate_snapshots(fam, fam.sample(3, 1))
        for i in range(len(s)):
            assert s.quantile(i).is_valid()


@pytest.mark.slow
def test_full_size_burgers_training_set_archives(tmp_path):
    from wassrom.experiment.archive import load_snapshots, save_snapshots
    s = sample_training_set(make_family("burgers_inviscid"), 5000, seed=1)
    save_snapshots(tmp_path / "train", s)
    back = load_snapshots(tmp_path / "train")
    assert len(back) == 5000 and np.array_equal(back.icdfs, s.icdfs)
