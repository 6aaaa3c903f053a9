"""
SINR coverage: two tier (per class and total) and the K-tier generalization.
"""
from typing import Dict, NamedTuple, Optional, Sequence

import numpy as np

from data.config import NetworkConfig, UserClass
from layers.functions.association import class_models, tier_geometry
from layers.modules.coverage_model import CoverageModel
from layers.output_utils import CcdfCurve
from utils.errors import DomainError
from utils.functions import db2lin


class SinrCoverage(NamedTuple):
    total: float
    # None for a class nobody belongs to
    per_class: Dict[UserClass, Optional[float]]


def _check_threshold(t):
    if not t > 0:
        raise DomainError('SINR threshold must be > 0, got %r' % (t,))


def sinr_coverage_from_models(models:Dict[UserClass, CoverageModel], t:float) -> SinrCoverage:
    """ S = sum_l A_l S_l over the non-empty classes. """
    _check_threshold(t)

    total = 0.
    per_class = {}
    for l, model in models.items():
        if model.degenerate:
            per_class[l] = None
            continue
        per_class[l] = model.coverage(t)
        total += model.assoc_prob * per_class[l]

    return SinrCoverage(min(total, 1.), per_class)


def sinr_coverage(cfg:NetworkConfig, t:float, method:str='auto') -> SinrCoverage:
    """
    SINR coverage of the typical user at linear threshold t.

    With partitioning the offloaded users see no macro interference, otherwise
    they do; beyond that eta plays no role, so any two eta in (0, 1) give the
    same numbers. method='auto' uses the ratio form when the path loss
    exponents agree and there is no noise, 'integral' always integrates.
    """
    return sinr_coverage_from_models(class_models(cfg, method), t)


def sinr_coverage_curve(cfg:NetworkConfig, thresholds_db:Sequence[float], method:str='auto') -> CcdfCurve:
    """ Total and per class coverage over a grid of thresholds in dB. """
    models = class_models(cfg, method)
    thresholds = db2lin(np.asarray(thresholds_db, dtype=float))

    totals, per_class = [], {l: [] for l in UserClass}
    for t in thresholds:
        cov = sinr_coverage_from_models(models, float(t))
        totals.append(cov.total)
        for l in UserClass:
            per_class[l].append(cov.per_class[l])

    return CcdfCurve(thresholds, np.array(totals), 'sinr', per_class=per_class)


class KTierCoverage(NamedTuple):
    s_unbiased: Optional[float]
    s_offloaded: Optional[float]
    a_unbiased: float
    a_offloaded: float


def ktier_sinr_coverage(cfg:NetworkConfig, j:int, t:float, variant:str='exact',
                        method:str='auto') -> KTierCoverage:
    """
    Conditional SINR coverage of the unbiased (B_bar_j) and offloaded (B_j)
    users of tier j in a K >= 2 tier network, plus their association
    probabilities. Tiers are numbered from 1 (macro).

    variant='printed' evaluates the offloaded term in product form, which is
    exact for K = 2 with partitioning and an approximation otherwise; 'exact'
    is the difference of the two exclusion events.
    """
    _check_threshold(t)

    unbiased  = CoverageModel(cfg, tier_geometry(cfg, j, offloaded=False), method)
    offloaded = CoverageModel(cfg, tier_geometry(cfg, j, offloaded=True, variant=variant), method)

    s_unbiased  = None if unbiased.degenerate  else unbiased.coverage(t)
    s_offloaded = None if offloaded.degenerate else offloaded.coverage(t)

    return KTierCoverage(s_unbiased, s_offloaded,
                         max(unbiased.assoc_prob, 0.), max(offloaded.assoc_prob, 0.))


def ktier_sinr_coverage_total(cfg:NetworkConfig, t:float, variant:str='exact', method:str='auto') -> float:
    """ sum_j (A_B_bar_j S_B_bar_j + A_B_j S_B_j), the K-tier SINR coverage. """
    total = 0.
    for j in range(1, cfg.num_tiers + 1):
        cov = ktier_sinr_coverage(cfg, j, t, variant, method)
        if cov.s_unbiased is not None:
            total += cov.a_unbiased * cov.s_unbiased
        if cov.s_offloaded is not None:
            total += cov.a_offloaded * cov.s_offloaded
    return total
