"""
Closed forms for two tiers with path loss exponent 4 everywhere, no noise and
always-on APs. Everything is written in terms of

    a = lam_2 / lam_1,  p = P_2 / P_1,  b = B_2 / B_1,  s = a * sqrt(p)

and Q(t, 4, c) = sqrt(c) + sqrt(t) * arctan(sqrt(t / c)), v(t) = Q(t, 4, 1).
"""
import math
from typing import NamedTuple, Tuple

from data.config import NetworkConfig
from utils.errors import DomainError
from utils.functions import shannon_threshold


class ClosedFormParams(NamedTuple):
    a: float
    p: float
    b: float

    @property
    def s(self) -> float:
        return self.a * math.sqrt(self.p)

    @staticmethod
    def v(t:float) -> float:
        return q4(t, 1.)

    @classmethod
    def from_cfg(cls, cfg:NetworkConfig) -> 'ClosedFormParams':
        check_alpha4(cfg)
        macro, small = cfg.tiers
        return cls(small.density / macro.density, small.power / macro.power, small.bias / macro.bias)

    def check(self):
        if not (self.a > 0 and self.p > 0 and self.b > 0):
            raise DomainError('closed form parameters must be positive, got %s' % (self,))


def check_alpha4(cfg:NetworkConfig):
    """ Raises DomainError unless cfg lives where the closed forms hold. """
    cfg.require_two_tier()
    if any(float(t.ple) != 4. for t in cfg.tiers):
        raise DomainError('closed forms need a path loss exponent of 4 on both tiers')
    if cfg.noise != 0:
        raise DomainError('closed forms need noise_dbm = null')
    if any(t.activity != 1 for t in cfg.tiers):
        raise DomainError('closed forms assume every AP is active')

def alpha4_applicable(cfg:NetworkConfig) -> bool:
    try:
        check_alpha4(cfg)
    except DomainError:
        return False
    return True


def q4(t:float, c:float) -> float:
    if t <= 0:
        return math.sqrt(c)
    if math.isinf(t):
        return math.inf
    return math.sqrt(c) + math.sqrt(t) * math.atan(math.sqrt(t / c))


def _inv(x:float) -> float:
    return 0. if math.isinf(x) else 1. / x


def coverage_terms_alpha4(params:ClosedFormParams, t_macro:float, t_small:float,
                          t_offloaded:float, partitioned:bool) -> Tuple[float, float, float]:
    """
    The per class joint terms A_l * S_l, each at its own threshold, which is what
    both the SINR and the mean load rate closed forms are made of.
    Returns (macro, small unbiased, offloaded).
    """
    params.check()
    s, b = params.s, params.b

    macro = _inv(q4(t_macro, 1.) + s * q4(t_macro, b))
    small = _inv(q4(t_small, 1.) + q4(t_small, 1.) / s)

    if partitioned:
        v = q4(t_offloaded, 1.)
        offloaded = _inv(v + 1. / (s * math.sqrt(b))) - _inv(v + 1. / s)
    else:
        # Offloaded users keep macro interference: tier 2 as a whole minus the unbiased part
        v = q4(t_offloaded, 1.)
        offloaded = _inv(v + q4(t_offloaded, 1. / b) / s) - _inv(v + v / s)

    return macro, small, max(offloaded, 0.)


def sinr_coverage_alpha4_closed(params:ClosedFormParams, t:float, partitioned:bool=True) -> float:
    """
    SINR coverage with (partitioned=True) or without resource partitioning.
    The two agree at b = 1.
    """
    if not t > 0:
        raise DomainError('SINR threshold must be > 0, got %r' % (t,))
    return sum(coverage_terms_alpha4(params, t, t, t, partitioned))


def mean_loads_alpha4(params:ClosedFormParams, user_density:float, macro_density:float,
                      partitioned:bool, factor:float) -> Tuple[float, float, float]:
    """ Mean loads K_1, K_B_bar, K_B with the association probabilities in closed form. """
    s, b = params.s, params.b
    a1 = 1. / (1. + s * math.sqrt(b))
    a_bbar = 1. / (1. + 1. / s)
    a_b = max(1. - a1 - a_bbar, 0.)

    small_density = params.a * macro_density
    k1 = 1. + factor * user_density * a1 / macro_density
    if partitioned:
        k_bbar = 1. + factor * user_density * a_bbar / small_density
        k_b = 1. + factor * user_density * a_b / small_density
    else:
        k_bbar = k_b = 1. + factor * user_density * (a_bbar + a_b) / small_density
    return k1, k_bbar, k_b


def rate_coverage_mean_load_alpha4(cfg:NetworkConfig, rho:float) -> float:
    """
    Mean load rate coverage in closed form. Each class gets the SINR threshold
    t(rho / W * G_l * K_l) and the terms of coverage_terms_alpha4.
    """
    params = ClosedFormParams.from_cfg(cfg)
    if rho <= 0:
        return 1.

    k1, k_bbar, k_b = mean_loads_alpha4(params, cfg.user_density, cfg.tier(1).density,
                                        cfg.partitioned, cfg.mean_load_factor)
    rho_hat = rho / cfg.bandwidth
    if cfg.partitioned:
        g_main, g_off = 1. / (1. - cfg.eta), 1. / cfg.eta
    else:
        g_main = g_off = 1.

    terms = coverage_terms_alpha4(params,
                                  shannon_threshold(rho_hat * g_main * k1),
                                  shannon_threshold(rho_hat * g_main * k_bbar),
                                  shannon_threshold(rho_hat * g_off * k_b),
                                  cfg.partitioned)
    return sum(terms)
