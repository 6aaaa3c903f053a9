import math

import pytest

from layers.kernels import adaptive_integrate, q_kernel, z_kernel
from utils.errors import DomainError


def test_q_kernel_values():
    assert q_kernel(1., 4., 1.)[0] == pytest.approx(1.785398, abs=1e-6)
    assert q_kernel(0.5, 4., 10.)[0] == pytest.approx(3.3178, abs=1e-4)


def test_q_is_exclusion_plus_interference():
    q, z = q_kernel(2., 3.5, 0.3)
    assert q == pytest.approx(0.3 ** (2 / 3.5) + z)


@pytest.mark.parametrize('t, c', [(0.1, 1.), (1., 1.), (10., 0.1), (3., 20.)])
def test_arctan_form_matches_the_integral(t, c):
    assert z_kernel(t, 4., c, closed=False) == pytest.approx(z_kernel(t, 4., c), abs=1e-7)


def test_z_grows_with_threshold():
    values = [z_kernel(t, 3.5, 1.) for t in (0.1, 0.5, 1., 5., 20.)]
    assert all(a < b for a, b in zip(values, values[1:]))


def test_zero_threshold():
    assert z_kernel(0., 3.5, 2.) == 0.
    assert q_kernel(0., 4., 9.)[0] == pytest.approx(3.)


@pytest.mark.parametrize('t, b, c', [(1., 2., 1.), (1., 1.5, 1.), (1., 4., 0.), (-1., 4., 1.)])
def test_domain(t, b, c):
    with pytest.raises(DomainError):
        q_kernel(t, b, c)


def test_adaptive_integrate():
    value, residual = adaptive_integrate(lambda y: math.exp(-y))
    assert value == pytest.approx(1., abs=1e-8)
    assert residual <= 1e-8

    assert adaptive_integrate(lambda y: 1. / (1. + y * y))[0] == pytest.approx(math.pi / 2, abs=1e-8)
    assert adaptive_integrate(lambda y: y * y, 0., 1.)[0] == pytest.approx(1. / 3.)
    assert adaptive_integrate(lambda y: y * y, 1., 0.)[0] == pytest.approx(-1. / 3.)
    assert adaptive_integrate(lambda y: y, 2., 2.) == (0., 0.)


def test_adaptive_integrate_shifted_infinite_range():
    assert adaptive_integrate(lambda y: math.exp(-y), 2.)[0] == pytest.approx(math.exp(-2.), abs=1e-8)


def test_adaptive_integrate_tolerance_domain():
    with pytest.raises(DomainError):
        adaptive_integrate(lambda y: y, 0., 1., tol=0.)
