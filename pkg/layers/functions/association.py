"""
Who serves whom: the biased association rule turned into exclusion terms,
association probabilities and serving distance densities.
"""
from typing import Dict, NamedTuple

import numpy as np

from data.config import NetworkConfig, NormalizedParams, UserClass
from layers.modules.coverage_model import ClassGeometry, CoverageModel, ExclusionTerm
from utils.errors import DomainError


class AssocProbabilities(NamedTuple):
    a1: float
    a_bbar: float
    a_b: float

    @property
    def a2(self) -> float:
        """ Fraction of users served by small cells (the offload fraction). """
        return self.a_bbar + self.a_b

    def of(self, user_class:UserClass) -> float:
        return {UserClass.MACRO: self.a1,
                UserClass.SMALL_UNBIASED: self.a_bbar,
                UserClass.OFFLOADED: self.a_b}[user_class]


def tier_geometry(cfg:NetworkConfig, j:int, offloaded:bool, variant:str='exact') -> ClassGeometry:
    """
    Exclusion terms for the users of tier j, split by whether the bias was
    needed to pull them there.

    Unbiased users of tier j (set B_bar_j): P_j X_j^-a_j > P_k B_k X_k^-a_k for
    every other tier, so tier k is empty within the radius given by c_k = B_k.

    Offloaded users (set B_j): biased association to j holds (c_k = B_hat_k)
    but the unbiased one fails, which is the difference of the two exclusion
    events. The macro tier is muted for them when resources are partitioned.

    variant='printed' gives the K-tier expression in its product form,
    prod_{k != j} (1 - exp(...(B_j^(2/a_k) - 1))), with interference from tier k
    integrated from the biased radius in every expanded term. For K = 2 with
    partitioning both variants are the same function; without it they differ
    in where the macro interference integral starts.
    """
    if variant not in ('exact', 'printed'):
        raise DomainError('unknown K-tier variant %r' % (variant,))
    if not 1 <= j <= cfg.num_tiers:
        raise DomainError('serving tier %d out of range 1..%d' % (j, cfg.num_tiers))
    if any(t.bias_db < 0 for t in cfg.tiers[1:]):
        raise DomainError('small cell biases must be >= 0 dB')

    K = cfg.num_tiers
    bias = [t.bias for t in cfg.tiers]
    b_hat = NormalizedParams(cfg, j).b_hat
    own = j - 1

    if not offloaded:
        c = tuple(1. if k == own else bias[k] for k in range(K))
        return ClassGeometry(j, (True,) * K, (ExclusionTerm(1., c, c),))

    interferes = tuple(not (k == 0 and own != 0 and cfg.partitioned) for k in range(K))
    biased = tuple(1. if k == own else b_hat[k] for k in range(K))

    if variant == 'exact':
        unbiased = tuple(1. if k == own else bias[k] for k in range(K))
        terms = (ExclusionTerm( 1., biased, biased),
                 ExclusionTerm(-1., unbiased, unbiased))
        return ClassGeometry(j, interferes, terms)

    # Expand prod_{k != j} (1 - E_k) over subsets; E_k scales tier k's empty
    # ball by B_j^(2/a_k), which is the same as c_assoc = B_hat_k * B_j.
    others = [k for k in range(K) if k != own]
    terms = []
    for mask in range(1 << len(others)):
        c_assoc = list(biased)
        sign = 1.
        for bit, k in enumerate(others):
            if mask >> bit & 1:
                c_assoc[k] = b_hat[k] * bias[own]
                sign = -sign
        terms.append(ExclusionTerm(sign, tuple(c_assoc), biased))

    return ClassGeometry(j, interferes, tuple(terms))


def class_geometry(cfg:NetworkConfig, user_class:UserClass) -> ClassGeometry:
    """ Two tier user classes in terms of tier_geometry. """
    cfg.require_two_tier()
    if user_class is UserClass.MACRO:
        return tier_geometry(cfg, 1, offloaded=False)
    return tier_geometry(cfg, 2, offloaded=user_class is UserClass.OFFLOADED)


def class_models(cfg:NetworkConfig, method:str='auto') -> Dict[UserClass, CoverageModel]:
    """ A CoverageModel for each of the three two tier user classes. """
    return {l: CoverageModel(cfg, class_geometry(cfg, l), method) for l in UserClass}


def association_probabilities(cfg:NetworkConfig, method:str='auto') -> AssocProbabilities:
    """
    A_1, A_B_bar and A_B. With equal path loss exponents this is a ratio of
    densities (method='auto' or 'closed'), otherwise three integrals over the
    serving distance.
    """
    models = class_models(cfg, method)
    a1, a_bbar, a_b = (max(models[l].assoc_prob, 0.) for l in UserClass)

    # The offloaded set is empty at 0 dB bias, make that exact
    if cfg.tier(2).bias_db == 0:
        a_b = 0.

    return AssocProbabilities(a1, a_bbar, a_b)


def serving_distance_pdf(cfg:NetworkConfig, user_class:UserClass, y, method:str='auto') -> np.ndarray:
    """
    Density of the distance to the serving AP for a user of the given class.
    Raises DegenerateClassError when the class is empty.
    """
    return CoverageModel(cfg, class_geometry(cfg, user_class), method).distance_pdf(y)
