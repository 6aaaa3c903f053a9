import math

import numpy as np
import pytest

from data.config import UserClass
from layers.functions.association import association_probabilities
from layers.functions.rate import (LOAD_CAP_MEANS, LOAD_CAP_MIN, LOAD_TAIL, RateModel, load_pmf,
                                   load_pmf_from_ratio, mean_load, rate_coverage, rate_coverage_curve,
                                   rate_coverage_mean_load, rate_percentile)
from utils.errors import BracketError, DegenerateClassError, DomainError

RHOS = (1e4, 5e4, 2e5, 1e6, 5e6)


@pytest.mark.parametrize('c', [0.01, 0.1, 1., 10., 50., 100., 500.])
def test_load_pmf_sums_to_one(c):
    pmf = load_pmf_from_ratio(c)
    assert pmf.masses.sum() + pmf.tail_mass == pytest.approx(1., abs=1e-8)
    # the cap never cuts off more than the tail tolerance
    assert pmf.tail_mass <= LOAD_TAIL
    assert pmf.n_max <= max(LOAD_CAP_MIN, math.ceil(LOAD_CAP_MEANS * pmf.mean))
    assert np.all(pmf.masses >= 0)


def test_load_pmf_formula():
    c = 10.
    pmf = load_pmf_from_ratio(c)
    for n in range(1, 6):
        log_p = (3.5 * math.log(3.5) - math.lgamma(n) + math.lgamma(n + 3.5) - math.lgamma(3.5)
                 + (n - 1) * math.log(c) - (n + 3.5) * math.log(3.5 + c))
        assert pmf.masses[n - 1] == pytest.approx(math.exp(log_p), rel=1e-10)


def test_load_pmf_mean():
    pmf = load_pmf_from_ratio(10.)
    assert pmf.mean == pytest.approx(1. + 10. * 4.5 / 3.5)
    assert float(np.dot(pmf.loads, pmf.masses)) == pytest.approx(pmf.mean, abs=1e-3)


def test_empty_class_has_load_one():
    pmf = load_pmf_from_ratio(0.)
    assert pmf.n_max == 1
    assert pmf.masses[0] == 1.
    assert pmf.tail_mass == 0.
    with pytest.raises(DomainError):
        load_pmf_from_ratio(-1.)


def test_load_ratio_per_class(alpha4):
    assoc = association_probabilities(alpha4)
    assert load_pmf(alpha4, UserClass.MACRO).c == pytest.approx(100. * assoc.a1)
    assert load_pmf(alpha4, UserClass.OFFLOADED).c == pytest.approx(100. * assoc.a_b / 5.)
    assert mean_load(alpha4, UserClass.MACRO) == pytest.approx(1. + 1.28 * 100. * assoc.a1)


def test_one_pool_without_partitioning(alpha4):
    model = RateModel(alpha4.with_eta(0.))
    small, offloaded = model.pmfs[UserClass.SMALL_UNBIASED], model.pmfs[UserClass.OFFLOADED]
    assert small.c == offloaded.c == pytest.approx(100. * model.assoc.a2 / 5.)
    assert model.mean_loads[UserClass.SMALL_UNBIASED] == model.mean_loads[UserClass.OFFLOADED]
    assert all(model.divisor[l] == 1. for l in UserClass)


def test_degenerate_class(alpha4):
    unbiased = alpha4.with_bias(0.)
    with pytest.raises(DegenerateClassError):
        load_pmf(unbiased, UserClass.OFFLOADED)
    assert rate_coverage(unbiased, 1e5).per_class[UserClass.OFFLOADED] is None


def test_zero_rate_is_always_covered(alpha4):
    assert rate_coverage(alpha4, 0.).total == pytest.approx(1., abs=1e-12)
    with pytest.raises(DomainError):
        rate_coverage(alpha4, -1.)


def test_rate_coverage_is_non_increasing(alpha4):
    model = RateModel(alpha4)
    values = [model.full(rho).total for rho in RHOS]
    assert all(a >= b for a, b in zip(values, values[1:]))
    assert values[0] > 0.75
    assert values[-1] < 0.1


def test_function_matches_model(alpha4):
    assert rate_coverage(alpha4, 2e5).total == RateModel(alpha4).full(2e5).total


def test_per_class_values_are_probabilities(alpha4):
    cov = rate_coverage(alpha4, 2e5)
    assert all(0. <= cov.per_class[l] <= 1. for l in UserClass)
    assoc = association_probabilities(alpha4)
    assert cov.total == pytest.approx(sum(assoc.of(l) * cov.per_class[l] for l in UserClass))


def test_mean_load_path_uses_closed_form_when_it_can(alpha4):
    closed = rate_coverage_mean_load(alpha4, 2e5)
    assert closed.per_class[UserClass.MACRO] is None
    assert closed.total == pytest.approx(RateModel(alpha4).mean_load(2e5).total, abs=1e-6)


def test_rate_curve(alpha4):
    curve = rate_coverage_curve(alpha4, RHOS)
    assert curve.kind == 'rate'
    assert np.all(np.diff(curve.values) <= 0)
    frame = curve.to_frame('threshold_bps')
    assert list(frame.columns) == ['threshold_bps', 'coverage', 'class_macro', 'class_small', 'class_offloaded']


@pytest.mark.parametrize('q', [0.05, 0.5])
def test_percentile_inverts_rate_coverage(alpha4, q):
    model = RateModel(alpha4)
    res = rate_percentile(alpha4, q, model=model)
    assert res.bracketed
    assert model.full(res.rho).total == pytest.approx(1. - q, abs=2e-3)


def test_percentile_bracket_failure(alpha4):
    res = rate_percentile(alpha4, 0.05, rho_max=10.)
    assert res == (10., False)
    with pytest.raises(BracketError):
        rate_percentile(alpha4, 0.05, rho_max=10., strict=True)


def test_percentile_domain(alpha4):
    with pytest.raises(DomainError):
        rate_percentile(alpha4, 0.)
    with pytest.raises(DomainError):
        rate_percentile(alpha4, 0.05, path='nearest')


def test_partitioning_changes_rates_not_sinr(alpha4):
    low, high = RateModel(alpha4.with_eta(0.2)), RateModel(alpha4.with_eta(0.8))
    assert low.full(2e5).per_class[UserClass.MACRO] > high.full(2e5).per_class[UserClass.MACRO]
    assert low.full(2e5).per_class[UserClass.OFFLOADED] < high.full(2e5).per_class[UserClass.OFFLOADED]


@pytest.mark.slow
@pytest.mark.parametrize('bias_db, eta', [(0., 0.), (10., 0.5)])
def test_mean_load_approximation_is_close(validation, bias_db, eta):
    cfg = validation.with_bias(bias_db).with_eta(eta)
    model = RateModel(cfg)
    for rho in (1e4, 5e4, 1e5, 3e5, 1e6):
        assert model.mean_load(rho).total == pytest.approx(model.full(rho).total, abs=0.05)


@pytest.mark.slow
def test_validation_percentile(validation):
    model = RateModel(validation)
    res = rate_percentile(validation, 0.05, model=model)
    assert res.bracketed
    assert model.full(res.rho).total == pytest.approx(0.95, abs=2e-3)
