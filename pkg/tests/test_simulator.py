import math

import numpy as np
import pytest

from data.config import UserClass
from layers.functions.association import class_models
from layers.functions.coverage import ktier_sinr_coverage_total
from layers.functions.rate import RateModel, load_pmf_from_ratio
from simulator import (LoadHistogram, ProbeResult, class_frequencies, empirical_ccdf, empirical_load_pmf,
                       evaluate_probe, ks_distance, run_drops, sample_realization, total_variation)
from utils.errors import DomainError, InsufficientSamplesError


def _probe(sinr=1., rate=1e5, serving_tier=1, offloaded=False, load=1):
    return ProbeResult(serving_tier, offloaded, 0.1, sinr, sinr, load, load, rate, rate)


def test_same_seed_same_network(sparse):
    a = sample_realization(sparse, seed=7)
    b = sample_realization(sparse, seed=7)
    c = sample_realization(sparse, seed=8)
    for x, y in zip(a.ap_points, b.ap_points):
        np.testing.assert_array_equal(x, y)
    np.testing.assert_array_equal(a.user_points, b.user_points)
    assert a.seed == b.seed
    assert not all(len(x) == len(y) and np.array_equal(x, y) for x, y in zip(a.ap_points, c.ap_points))


def test_ap_count_is_poisson_mean(sparse):
    window = sparse.mc.window_km
    mean = sparse.tier(1).density * window ** 2
    counts = [len(sample_realization(sparse, seed=s).ap_points[0]) for s in range(200)]
    assert np.mean(counts) == pytest.approx(mean, abs=5 * math.sqrt(mean / 200))


def test_nearest_macro_distance_is_rayleigh(sparse):
    lam = sparse.tier(1).density
    distances = []
    for s in range(500):
        pts = sample_realization(sparse, seed=s).ap_points[0]
        distances.append(np.hypot(pts[:, 0], pts[:, 1]).min())
    assert ks_distance(distances, lambda r: 1. - math.exp(-math.pi * lam * r * r)) < 0.1


def test_small_window_is_flagged(sparse):
    assert sample_realization(sparse, window=1., seed=0).window_warning
    assert not sample_realization(sparse, seed=0).window_warning
    with pytest.raises(DomainError):
        sample_realization(sparse, window=0.)


def test_no_offloading_without_bias(sparse):
    results = run_drops(sparse.with_bias(0.), drops=60, seed=1, threads=1)
    assert not any(r.offloaded for r in results)


def test_muting_only_helps_offloaded_probes(sparse):
    results = run_drops(sparse.with_bias(15.), drops=150, seed=2, threads=1)
    assert any(r.offloaded for r in results)
    for r in results:
        if r.offloaded:
            assert r.sinr > r.sinr_unmuted
        else:
            assert r.sinr == r.sinr_unmuted


def test_rate_follows_load_and_sinr(sparse):
    for r in run_drops(sparse, drops=60, seed=3, threads=1):
        divisor = r.user_class.resource_divisor(sparse.eta)
        assert r.rate == pytest.approx(sparse.bandwidth / (divisor * r.load) * math.log2(1. + r.sinr))
        assert 1 <= r.load <= r.load_total
        assert r.rate_backhaul == r.rate


def test_empty_network_has_load_one(sparse):
    cfg = sparse.copy({'user_density_per_km2': 1e-6})
    results = run_drops(cfg, drops=30, seed=4, threads=1)
    assert all(r.load == r.load_total == 1 for r in results)


def test_backhaul_caps_rate(backhaul):
    cfg = backhaul.copy({'user_density_per_km2': 5.0})
    cfg.mc = cfg.mc.copy({'window_km': 10.0})
    for r in run_drops(cfg, drops=40, seed=5, threads=1):
        assert r.rate_backhaul == min(r.rate, cfg.tier(r.serving_tier).backhaul / r.load_total)


def test_results_do_not_depend_on_workers(sparse):
    serial = run_drops(sparse, drops=12, seed=9, threads=1)
    parallel = run_drops(sparse, drops=12, seed=9, threads=2)
    assert serial == parallel


def test_progress_reports_running_coverage(sparse, capsys):
    results = run_drops(sparse, drops=5, seed=9, threads=1, quiet=False)
    out = capsys.readouterr().out
    assert 'Drops' in out
    assert 'P(SINR > 0 dB) ~ %.3f' % np.mean([r.sinr > 1. for r in results]) in out


def test_evaluate_probe_is_pure(sparse):
    r = sample_realization(sparse, seed=11)
    assert evaluate_probe(r, sparse) == evaluate_probe(r, sparse)


def test_empirical_ccdf():
    results = [_probe(sinr=float(i)) for i in range(100)]
    curve = empirical_ccdf(results[::-1], [0.5, 49.5, 200.])
    np.testing.assert_allclose(curve.values, [0.99, 0.5, 0.])
    assert curve.kind == 'sinr'
    assert curve.halfwidths[1] == pytest.approx(1.96 * 0.05)
    assert curve.halfwidths[2] == 0.

    with pytest.raises(InsufficientSamplesError):
        empirical_ccdf(results[:10], [1.])
    with pytest.raises(DomainError):
        empirical_ccdf(results, [1.], metric='throughput')


def test_empirical_load_pmf():
    results = [_probe(load=1 + i % 4) for i in range(1000)] + [_probe(serving_tier=2, load=7)]
    hist = empirical_load_pmf(results, UserClass.MACRO)
    np.testing.assert_array_equal(hist.loads, [1, 2, 3, 4])
    np.testing.assert_allclose(hist.probabilities, 0.25)
    assert hist.mean == pytest.approx(2.5)
    with pytest.raises(InsufficientSamplesError):
        empirical_load_pmf(results, UserClass.SMALL_UNBIASED)


def test_class_frequencies():
    results = [_probe()] * 2 + [_probe(serving_tier=2)] + [_probe(serving_tier=2, offloaded=True)]
    freq = class_frequencies(results)
    assert freq[UserClass.MACRO][0] == 0.5
    assert freq[UserClass.OFFLOADED][0] == 0.25
    with pytest.raises(InsufficientSamplesError):
        class_frequencies([])


def test_total_variation():
    pmf = load_pmf_from_ratio(2.)
    same = LoadHistogram(UserClass.MACRO, pmf.loads, pmf.masses, 10 ** 6)
    assert total_variation(pmf, same) == pytest.approx(0.5 * pmf.tail_mass)
    point = LoadHistogram(UserClass.MACRO, np.array([1]), np.array([1.]), 10)
    assert total_variation(pmf, point) == pytest.approx(1. - pmf.masses[0], abs=1e-6)


@pytest.mark.slow
@pytest.mark.parametrize('bias_db, eta', [(10., 0.5), (0., 0.)])
def test_simulation_matches_analysis(validation, bias_db, eta):
    cfg = validation.with_bias(bias_db).with_eta(eta)
    results = run_drops(cfg)
    model = RateModel(cfg)
    for l, (p, hw) in class_frequencies(results).items():
        assert abs(p - model.assoc.of(l)) <= hw + 0.01

    rhos = np.geomspace(1e4, 1e7, 20)
    simulated = empirical_ccdf(results, rhos, metric='rate')
    analytic = [model.full(rho).total for rho in rhos]
    assert np.max(np.abs(simulated.values - analytic)) <= 0.04


@pytest.mark.slow
@pytest.mark.parametrize('capacity', [5., 20.])
def test_backhaul_rate_matches_simulation(backhaul, capacity):
    cfg = backhaul.with_tier(2, backhaul_mbps=capacity)
    results = run_drops(cfg)
    rhos = np.geomspace(1e4, 1e7, 20)
    simulated = empirical_ccdf(results, rhos, metric='rate_backhaul')
    model = RateModel(cfg)
    analytic = [model.backhaul(rho).total for rho in rhos]
    assert np.max(np.abs(simulated.values - analytic)) <= 0.04


@pytest.mark.slow
def test_ktier_coverage_matches_simulation(ktier):
    thresholds = 10 ** (np.array([-5., 0., 5., 10.]) / 10)
    simulated = empirical_ccdf(run_drops(ktier), thresholds)
    analytic = [ktier_sinr_coverage_total(ktier, t, 'exact') for t in thresholds]
    assert np.max(np.abs(simulated.values - analytic)) <= 0.03


@pytest.mark.slow
def test_serving_distance_matches_analysis(validation):
    results = run_drops(validation)
    models = class_models(validation)
    for l in UserClass:
        distances = [r.serving_distance for r in results if r.user_class is l]
        if len(distances) < 200:
            continue
        # 99% Kolmogorov-Smirnov critical value plus quadrature slack
        assert ks_distance(distances, models[l].distance_cdf) <= 1.63 / math.sqrt(len(distances)) + 0.01


@pytest.mark.slow
def test_window_is_large_enough(validation):
    cfg = validation.copy({'user_density_per_km2': 1.0})
    thresholds = 10 ** (np.array([-5., 0., 5., 10.]) / 10)
    small = empirical_ccdf(run_drops(cfg, window=20.), thresholds)
    large = empirical_ccdf(run_drops(cfg, window=40.), thresholds)
    assert np.all(np.abs(small.values - large.values) <= np.hypot(small.halfwidths, large.halfwidths) + 0.01)


@pytest.mark.slow
def test_load_matches_voronoi_cells(alpha4):
    # Equal powers and no bias make every cell a plain Poisson-Voronoi cell
    cfg = alpha4.with_tier(2, tx_power_dbm=alpha4.tier(1).tx_power_dbm, bias_db=0.)
    model = RateModel(cfg)
    hist = empirical_load_pmf(run_drops(cfg), UserClass.SMALL_UNBIASED)
    assert total_variation(model.pmfs[UserClass.SMALL_UNBIASED], hist) <= 0.1
    assert hist.mean == pytest.approx(model.mean_loads[UserClass.SMALL_UNBIASED], rel=0.05)


@pytest.mark.slow
def test_load_with_bias_and_unequal_powers(validation):
    # The gamma cell area law is only approximate for weighted cells, so the bounds are loose
    model = RateModel(validation)
    results = run_drops(validation)
    for l in model.classes:
        try:
            hist = empirical_load_pmf(results, l, min_samples=300)
        except InsufficientSamplesError:
            continue
        assert total_variation(model.pmfs[l], hist) <= 0.2
        assert hist.mean == pytest.approx(model.mean_loads[l], rel=0.2)
