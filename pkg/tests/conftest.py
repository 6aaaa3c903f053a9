import math

import pytest

from data.config import alpha4_config, backhaul_config, ktier_config, validation_config


def alpha4_network(a:float, p:float, b:float, eta:float=0.5):
    """ alpha = 4, noiseless two tier network with lam_2 / lam_1 = a, P_2 / P_1 = p and B = b. """
    macro = alpha4_config.tier(1)
    return alpha4_config.with_tier(2, density_per_km2=a * macro.density_per_km2,
                                   tx_power_dbm=macro.tx_power_dbm + 10 * math.log10(p),
                                   bias_db=10 * math.log10(b)).with_eta(eta)


@pytest.fixture
def validation():
    return validation_config.copy()

@pytest.fixture
def alpha4():
    return alpha4_config.copy()

@pytest.fixture
def backhaul():
    return backhaul_config.copy()

@pytest.fixture
def ktier():
    return ktier_config.copy()

@pytest.fixture
def sparse():
    """ The validation network with few users and a small window, cheap to simulate. """
    cfg = validation_config.copy({'user_density_per_km2': 5.0})
    cfg.mc = cfg.mc.copy({'window_km': 10.0, 'drops': 200})
    return cfg
