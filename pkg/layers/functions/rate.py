"""
Load distribution and rate coverage: full load PMF, mean load approximation,
limited backhaul, and the inversion to rate percentiles.

All rate formulas condition on the load and then reuse the conditional SINR
coverage at t(n * rho / W * G_l) with t(x) = 2^x - 1, treating load and SINR
as independent.
"""
import math
from dataclasses import dataclass
from typing import Dict, NamedTuple, Optional, Sequence

import numpy as np
from scipy import optimize, stats

from data.config import VORONOI_SHAPE, NetworkConfig, UserClass
from layers.functions.association import AssocProbabilities, association_probabilities, class_models
from layers.functions.closed_form import alpha4_applicable, rate_coverage_mean_load_alpha4
from layers.output_utils import CcdfCurve
from utils.errors import BracketError, DegenerateClassError, DomainError
from utils.functions import shannon_threshold

LOAD_TAIL = 1e-6
# Truncation never goes past max(LOAD_CAP_MIN, LOAD_CAP_MEANS * mean)
LOAD_CAP_MIN = 50
LOAD_CAP_MEANS = 10
# Conditional coverage below this is treated as 0 when summing over loads
NEGLIGIBLE = 1e-15


# ----------------------- LOAD ----------------------- #

@dataclass
class LoadPmf:
    """ p(n) = P(K = n) for n = 1..n_max, K counting the typical user too. """
    user_class: Optional[UserClass]
    masses: np.ndarray
    tail_mass: float
    c: float

    @property
    def n_max(self) -> int:
        return len(self.masses)

    @property
    def loads(self) -> np.ndarray:
        return np.arange(1, self.n_max + 1)

    @property
    def mean(self) -> float:
        """ Mean of the untruncated PMF, 1 + c (shape + 1) / shape. """
        return 1. + self.c * (VORONOI_SHAPE + 1.) / VORONOI_SHAPE


def load_pmf_from_ratio(c:float, user_class:UserClass=None, tail:float=LOAD_TAIL) -> LoadPmf:
    """
    Load PMF at an AP whose class users have mean density ratio
    c = lam_u A_l / lam_J(l):

        p(n) = 3.5^3.5 / (n-1)! * Gamma(n + 3.5) / Gamma(3.5) * c^(n-1) * (3.5 + c)^-(n + 3.5)

    which is a negative binomial in n - 1 with r = 4.5, p = 3.5 / (3.5 + c),
    evaluated in log space. Truncated at the first n_max leaving at most `tail`
    mass above it, unless that exceeds the hard cap.
    """
    if not c >= 0:
        raise DomainError('load ratio must be >= 0, got %r' % (c,))
    if c == 0:
        return LoadPmf(user_class, np.array([1.]), 0., 0.)

    r = VORONOI_SHAPE + 1.
    prob = VORONOI_SHAPE / (VORONOI_SHAPE + c)
    mean = 1. + c * r / VORONOI_SHAPE
    cap = max(LOAD_CAP_MIN, int(math.ceil(LOAD_CAP_MEANS * mean)))

    # sf(n_max - 1) = P(K > n_max)
    n_max = int(stats.nbinom.isf(tail, r, prob)) + 1
    while n_max < cap and stats.nbinom.sf(n_max - 1, r, prob) > tail:
        n_max += 1
    while n_max > 1 and stats.nbinom.sf(n_max - 2, r, prob) <= tail:
        n_max -= 1
    n_max = min(max(n_max, 1), cap)

    masses = np.exp(stats.nbinom.logpmf(np.arange(n_max), r, prob))
    return LoadPmf(user_class, masses, float(stats.nbinom.sf(n_max - 1, r, prob)), c)


def _load_ratio(cfg:NetworkConfig, assoc:AssocProbabilities, user_class:UserClass) -> float:
    """ lam_u A / lam of the serving tier, with A the share of users that split the AP's resources with l. """
    if cfg.partitioned or user_class is UserClass.MACRO:
        share = assoc.of(user_class)
    else:
        # Without partitioning all small cell users share one pool
        share = assoc.a2
    return cfg.user_density * share / cfg.tier(user_class.serving_tier).density


def load_pmf(cfg:NetworkConfig, user_class:UserClass, assoc:AssocProbabilities=None) -> LoadPmf:
    """ PMF of the load at the tagged AP of a user of the given class. """
    if assoc is None:
        assoc = association_probabilities(cfg)
    if assoc.of(user_class) <= 0:
        raise DegenerateClassError('no user belongs to class %s' % user_class.value)
    return load_pmf_from_ratio(_load_ratio(cfg, assoc, user_class), user_class)


def mean_load(cfg:NetworkConfig, user_class:UserClass, assoc:AssocProbabilities=None) -> float:
    """ K_l = 1 + 1.28 lam_u A_l / lam_J(l) (factor from cfg.mean_load_factor). """
    if assoc is None:
        assoc = association_probabilities(cfg)
    return 1. + cfg.mean_load_factor * _load_ratio(cfg, assoc, user_class)


# ----------------------- RATE ----------------------- #

class RateCoverage(NamedTuple):
    total: float
    per_class: Dict[UserClass, Optional[float]]


class RateModel(object):
    """
    Everything the rate formulas need for one config, computed once:
    conditional SINR models, association probabilities, load PMFs and mean
    loads. Evaluating many rate thresholds on one RateModel reuses the cached
    conditional coverages.
    """

    def __init__(self, cfg:NetworkConfig, method:str='auto'):
        cfg.require_two_tier()
        self.cfg = cfg
        self.models = class_models(cfg, method)

        a = {l: max(m.assoc_prob, 0.) for l, m in self.models.items()}
        if cfg.tier(2).bias_db == 0:
            a[UserClass.OFFLOADED] = 0.
        self.assoc = AssocProbabilities(a[UserClass.MACRO], a[UserClass.SMALL_UNBIASED], a[UserClass.OFFLOADED])

        self.classes = [l for l in UserClass if not self.models[l].degenerate and self.assoc.of(l) > 0]
        self.pmfs = {l: load_pmf(cfg, l, self.assoc) for l in self.classes}
        self.mean_loads = {l: mean_load(cfg, l, self.assoc) for l in UserClass}
        self.divisor = {l: l.resource_divisor(cfg.eta) for l in UserClass}

    def _threshold(self, user_class:UserClass, load:float, rho:float) -> float:
        return shannon_threshold(load * rho / self.cfg.bandwidth * self.divisor[user_class])

    def _weighted(self, user_class:UserClass, rho:float) -> np.ndarray:
        """ p(n) * S_l(t(n rho_hat G_l)) for n = 1..n_max. """
        pmf = self.pmfs[user_class]
        model = self.models[user_class]

        out = np.zeros(pmf.n_max)
        for i, n in enumerate(pmf.loads):
            s = model.coverage(self._threshold(user_class, n, rho))
            if s < NEGLIGIBLE:
                # S_l is non-increasing in the load, so the rest are negligible too
                break
            out[i] = pmf.masses[i] * s
        return out

    def _combine(self, per_class:Dict[UserClass, float]) -> RateCoverage:
        total = sum(self.assoc.of(l) * per_class[l] for l in self.classes)
        full = {l: per_class.get(l) for l in UserClass}
        return RateCoverage(min(total, 1.), full)

    def full(self, rho:float) -> RateCoverage:
        if rho < 0:
            raise DomainError('rate threshold must be >= 0, got %r' % (rho,))
        if rho == 0:
            return self._combine({l: 1. for l in self.classes})
        return self._combine({l: float(np.sum(self._weighted(l, rho))) for l in self.classes})

    def mean_load(self, rho:float) -> RateCoverage:
        if rho < 0:
            raise DomainError('rate threshold must be >= 0, got %r' % (rho,))
        if rho == 0:
            return self._combine({l: 1. for l in self.classes})
        return self._combine({l: self.models[l].coverage(self._threshold(l, self.mean_loads[l], rho))
                              for l in self.classes})

    def backhaul(self, rho:float) -> RateCoverage:
        """
        Rate coverage when tier k's backhaul C_k is shared equally by the users of
        the AP: a user needs K <= ceil(C / rho - 1) on top of the radio condition.
        With partitioning the two small cell classes have independent loads, and
        the other class' users (m of them) eat into the same backhaul.
        """
        if not rho > 0:
            raise DomainError('rate threshold must be > 0, got %r' % (rho,))

        per_class = {}
        for l in self.classes:
            backhaul = self.cfg.tier(l.serving_tier).backhaul
            cum = np.concatenate(([0.], np.cumsum(self._weighted(l, rho))))
            n_max = len(cum) - 1

            def inner(limit):
                return cum[min(max(limit, 0), n_max)]

            if math.isinf(backhaul):
                per_class[l] = float(cum[-1])
                continue

            ratio = backhaul / rho
            other = _other_small_class(l)
            if l is UserClass.MACRO or not self.cfg.partitioned or other not in self.classes:
                per_class[l] = float(inner(math.ceil(ratio - 1)))
                continue

            # m = users of the other class at the AP, whose load PMF includes a typical user
            other_pmf = self.pmfs[other]
            m_max = min(math.ceil(ratio - 2), other_pmf.n_max - 1)
            value = 0.
            for m in range(0, m_max + 1):
                value += other_pmf.masses[m] * inner(math.ceil(ratio - m - 1))
            per_class[l] = float(value)

        return self._combine(per_class)

    def evaluate(self, rho:float, path:str='full') -> RateCoverage:
        if path == 'full':
            return self.full(rho)
        if path == 'mean_load':
            return self.mean_load(rho)
        if path == 'backhaul':
            return self.backhaul(rho)
        raise DomainError('unknown rate path %r' % (path,))


def _other_small_class(user_class:UserClass) -> Optional[UserClass]:
    if user_class is UserClass.SMALL_UNBIASED:
        return UserClass.OFFLOADED
    if user_class is UserClass.OFFLOADED:
        return UserClass.SMALL_UNBIASED
    return None


def rate_coverage(cfg:NetworkConfig, rho:float, method:str='auto') -> RateCoverage:
    """ P(rate > rho) averaging over the load PMF of each class. """
    return RateModel(cfg, method).full(rho)

def rate_coverage_mean_load(cfg:NetworkConfig, rho:float, method:str='auto') -> RateCoverage:
    """
    Rate coverage with every load replaced by its mean. For two tiers with path
    loss exponent 4, no noise and always-on APs, method 'auto' (or 'closed')
    evaluates the closed form and only the total is returned.
    """
    if method == 'closed' or (method == 'auto' and alpha4_applicable(cfg)):
        return RateCoverage(rate_coverage_mean_load_alpha4(cfg, rho), {l: None for l in UserClass})
    return RateModel(cfg, method).mean_load(rho)

def rate_coverage_backhaul(cfg:NetworkConfig, rho:float, method:str='auto') -> RateCoverage:
    """ Rate coverage with finite backhaul on some tier. Equal to rate_coverage when all are unlimited. """
    return RateModel(cfg, method).backhaul(rho)


def rate_coverage_curve(cfg:NetworkConfig, thresholds_bps:Sequence[float], path:str='full',
                        model:RateModel=None) -> CcdfCurve:
    """ Total and per class rate coverage over a threshold grid (bits/s). """
    if model is None:
        model = RateModel(cfg)

    totals, per_class = [], {l: [] for l in UserClass}
    for rho in thresholds_bps:
        cov = model.evaluate(float(rho), path)
        totals.append(cov.total)
        for l in UserClass:
            per_class[l].append(cov.per_class[l])

    return CcdfCurve(thresholds_bps, totals, 'rate', per_class=per_class)


class Percentile(NamedTuple):
    rho: float
    # False when R never crossed 1 - q inside the search range and rho is the range end
    bracketed: bool


def rate_percentile(cfg:NetworkConfig, q:float, path:str='full', rho_max:float=None,
                    tol:float=100., strict:bool=False, model:RateModel=None) -> Percentile:
    """
    The rate rho_q that a fraction q of the users do not get, i.e. R(rho_q) = 1 - q,
    found by bisection on [0, rho_max] to within tol bits/s. rho_max defaults to
    100 W, far beyond any reachable per-user rate.

    When R stays above 1 - q up to rho_max the result is (rho_max, bracketed=False);
    with strict=True that raises BracketError instead.
    """
    if not 0 < q < 1:
        raise DomainError('quantile must be in (0, 1), got %r' % (q,))
    if model is None:
        model = RateModel(cfg)
    if rho_max is None:
        rho_max = 100. * cfg.bandwidth

    target = 1. - q
    f = lambda rho: model.evaluate(rho, path).total - target

    # R(1 bit/s) is 1 up to rounding, so in practice only the upper end fails
    lo = 1.
    for end in (rho_max, lo):
        if (f(end) >= 0) == (end == rho_max):
            if strict:
                raise BracketError('rate coverage does not cross %.4f in [%g, %g] bits/s' % (target, lo, rho_max))
            return Percentile(float(end), False)

    rho = optimize.bisect(f, lo, rho_max, xtol=tol)
    return Percentile(float(rho), True)
