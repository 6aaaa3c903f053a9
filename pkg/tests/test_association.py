import math

import numpy as np
import pytest

from layers.functions.association import association_probabilities, class_models, serving_distance_pdf, tier_geometry
from layers.kernels import adaptive_integrate
from data.config import UserClass
from utils.errors import DegenerateClassError, DomainError


def test_alpha4_association(alpha4):
    assoc = association_probabilities(alpha4)
    assert assoc.a1 == pytest.approx(0.38743, abs=1e-5)
    assert assoc.a_bbar == pytest.approx(1. / 3., abs=1e-5)
    assert assoc.a_b == pytest.approx(0.27924, abs=1e-5)
    assert assoc.a2 == pytest.approx(assoc.a_bbar + assoc.a_b)


def test_ratio_form_matches_integrals(alpha4):
    closed = association_probabilities(alpha4, 'closed')
    integral = association_probabilities(alpha4, 'integral')
    for l in UserClass:
        assert closed.of(l) == pytest.approx(integral.of(l), abs=1e-6)


def test_probabilities_sum_to_one(validation):
    assoc = association_probabilities(validation)
    assert assoc.a1 + assoc.a_bbar + assoc.a_b == pytest.approx(1., abs=1e-6)
    assert all(0 < assoc.of(l) < 1 for l in UserClass)


def test_more_bias_moves_users_to_small_cells(validation):
    a2 = [association_probabilities(validation.with_bias(b)).a2 for b in (0., 5., 10., 15.)]
    assert all(x < y for x, y in zip(a2, a2[1:]))


def test_no_offloading_without_bias(validation):
    assoc = association_probabilities(validation.with_bias(0.))
    assert assoc.a_b == 0.
    with pytest.raises(DegenerateClassError):
        serving_distance_pdf(validation.with_bias(0.), UserClass.OFFLOADED, 1.)


def test_eta_does_not_change_association(validation):
    assert association_probabilities(validation.with_eta(0.1)) == association_probabilities(validation.with_eta(0.9))


@pytest.mark.parametrize('user_class', list(UserClass))
def test_serving_distance_pdf_integrates_to_one(validation, user_class):
    model = class_models(validation)[user_class]
    value, _ = adaptive_integrate(lambda y: float(model.distance_pdf(y)), 0., math.inf, 1e-9)
    assert value == pytest.approx(1., abs=1e-5)


def test_unbiased_small_cell_distance_is_rayleigh(alpha4):
    # With equal path loss exponents the unbiased small cell distance is Rayleigh with
    # lam_eff = lam_2 + lam_1 sqrt(P_1 / P_2)
    lam_eff = alpha4.tier(2).density + alpha4.tier(1).density * math.sqrt(alpha4.tier(1).power / alpha4.tier(2).power)
    y = np.linspace(0., 1., 11)
    expected = 2 * math.pi * lam_eff * y * np.exp(-math.pi * lam_eff * y ** 2)
    assert np.allclose(serving_distance_pdf(alpha4, UserClass.SMALL_UNBIASED, y), expected, atol=1e-9)


def test_distance_cdf(validation):
    model = class_models(validation)[UserClass.MACRO]
    assert model.distance_cdf(0.) == 0.
    assert model.distance_cdf(0.2) < model.distance_cdf(0.5) < model.distance_cdf(2.)
    assert model.distance_cdf(50.) == pytest.approx(1., abs=1e-6)


def test_negative_distance(validation):
    with pytest.raises(DomainError):
        serving_distance_pdf(validation, UserClass.MACRO, -1.)


def test_tier_geometry_checks(ktier):
    with pytest.raises(DomainError):
        tier_geometry(ktier, 4, offloaded=False)
    with pytest.raises(DomainError):
        tier_geometry(ktier, 2, offloaded=True, variant='approximate')
