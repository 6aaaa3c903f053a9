import math
from typing import Dict, NamedTuple, Sequence, Tuple

import numpy as np

from data.config import NetworkConfig, NormalizedParams
from layers.kernels import adaptive_integrate, z_kernel
from utils.errors import DegenerateClassError, DomainError

# Association probabilities at or below this are treated as an empty class
DEGENERATE_PROB = 1e-12


class ExclusionTerm(NamedTuple):
    """
    One signed term of a class' coverage integrand. For every tier k the
    nearest AP of tier k lies outside radius (P_hat_k c_k)^(1/alpha_k) y^(1/a_hat_k),
    where c_assoc[k] gives the radius of the empty ball and c_interf[k] the
    radius beyond which the tier's interferers are integrated. The two only
    differ for the K-tier formula taken verbatim.
    """
    sign: float
    c_assoc: Tuple[float, ...]
    c_interf: Tuple[float, ...]


class ClassGeometry(NamedTuple):
    """ Serving tier (1-based), which tiers interfere, and the signed exclusion terms. """
    j: int
    interferes: Tuple[bool, ...]
    terms: Tuple[ExclusionTerm, ...]


class CoverageModel(object):
    """
    Association probability, serving distance density and conditional SINR
    coverage of one user class, described by its ClassGeometry.

    The integrand of the conditional coverage at threshold t is

        y * exp(-t sigma^2 y^alpha_j / P_j)
          * sum_terms sign * exp(-pi sum_k lam_k P_hat_k^(2/alpha_k)
                                  * (c_assoc^(2/alpha_k) + I_k p_k Z(t, alpha_k, c_interf)) y^(2/a_hat_k))

    and the association probability is the same integral at t = 0. I_k says
    whether tier k interferes and p_k is its activity (interference thinning).

    When all path loss exponents agree the y-integrals are Gaussian and the
    whole thing collapses to a ratio of sums; 'auto' uses that whenever it
    applies, 'integral' always integrates, 'closed' insists on the ratio.

    Conditional coverages are cached per threshold, so a model can be reused
    across the load sums of the rate formulas.
    """

    def __init__(self, cfg:NetworkConfig, geometry:ClassGeometry, method:str='auto'):
        if method not in ('auto', 'integral', 'closed'):
            raise DomainError('unknown evaluation method %r' % (method,))

        self.geometry = geometry
        self.tol = cfg.tolerance
        self.method = method

        j = geometry.j
        norm = NormalizedParams(cfg, j)
        serving = cfg.tier(j)

        self.density_j = serving.density
        self.alpha_j = float(serving.ple)
        self.noise_coef = cfg.noise / serving.power

        self.lam      = [t.density for t in cfg.tiers]
        self.alpha    = [float(t.ple) for t in cfg.tiers]
        self.activity = [float(t.activity) for t in cfg.tiers]
        self.p_scale  = [norm.p_hat[k] ** (2. / self.alpha[k]) for k in range(cfg.num_tiers)]
        self.expo     = [2. / norm.a_hat[k] for k in range(cfg.num_tiers)]

        self.equal_ple = all(a == self.alpha_j for a in self.alpha)
        if method == 'closed' and not self.equal_ple:
            raise DomainError('closed form evaluation needs equal path loss exponents')

        self._coverage_cache = {}
        self.assoc_prob = self._joint(0.)

    # ------------------------------------------------------------------ #

    def _coefficients(self, t:float):
        """ Per term: pi * lam_k * P_hat_k^(2/alpha_k) * (...) for every tier k. """
        coefs = []
        for term in self.geometry.terms:
            row = []
            for k in range(len(self.lam)):
                a = self.alpha[k]
                inner = term.c_assoc[k] ** (2. / a)
                if t > 0 and self.geometry.interferes[k]:
                    inner += self.activity[k] * z_kernel(t, a, term.c_interf[k], self.tol)
                row.append(math.pi * self.lam[k] * self.p_scale[k] * inner)
            coefs.append(row)
        return coefs

    def _use_closed(self, t:float) -> bool:
        noiseless = t == 0 or self.noise_coef == 0
        if self.method == 'closed':
            if not noiseless:
                raise DomainError('closed form evaluation needs a noiseless network')
            return True
        return self.method == 'auto' and self.equal_ple and noiseless

    def _joint(self, t:float) -> float:
        """ P(SINR > t, user in this class), i.e. A_l * S_l(t). """
        coefs = self._coefficients(t)
        signs = [term.sign for term in self.geometry.terms]

        if self._use_closed(t):
            # int 2 pi lam_j y exp(-s y^2) dy = pi lam_j / s
            return sum(sg * math.pi * self.density_j / sum(row) for sg, row in zip(signs, coefs))

        expo = self.expo
        noise = t * self.noise_coef
        alpha_j = self.alpha_j

        def integrand(y):
            total = 0.
            for sg, row in zip(signs, coefs):
                total += sg * math.exp(-sum(c * y ** e for c, e in zip(row, expo)))
            if total == 0.:
                return 0.
            if noise > 0:
                total *= math.exp(-noise * y ** alpha_j)
            return y * total

        value, _ = adaptive_integrate(integrand, 0., math.inf, self.tol)
        return 2 * math.pi * self.density_j * value

    # ------------------------------------------------------------------ #

    @property
    def degenerate(self) -> bool:
        return self.assoc_prob <= DEGENERATE_PROB

    def _require_class(self):
        if self.degenerate:
            raise DegenerateClassError('user class served by tier %d has zero association probability'
                                       % self.geometry.j)

    def coverage(self, t:float) -> float:
        """ Conditional SINR coverage S_l(t) = P(SINR > t | user in this class). """
        self._require_class()

        if t <= 0:
            return 1.
        if math.isinf(t):
            return 0.

        if t not in self._coverage_cache:
            s = self._joint(float(t)) / self.assoc_prob
            self._coverage_cache[t] = min(max(s, 0.), 1.)
        return self._coverage_cache[t]

    def distance_pdf(self, y) -> np.ndarray:
        """ Density of the serving distance conditioned on the class. """
        self._require_class()

        y = np.asarray(y, dtype=float)
        if np.any(y < 0):
            raise DomainError('distances must be >= 0')

        coefs = self._coefficients(0.)
        total = np.zeros_like(y)
        for term, row in zip(self.geometry.terms, coefs):
            exponent = np.zeros_like(y)
            for c, e in zip(row, self.expo):
                exponent += c * y ** e
            total += term.sign * np.exp(-exponent)

        return 2 * math.pi * self.density_j * y * total / self.assoc_prob

    def distance_cdf(self, y:float) -> float:
        """ P(Y <= y | class), by integrating distance_pdf. """
        if y <= 0:
            return 0.
        value, _ = adaptive_integrate(lambda x: float(self.distance_pdf(x)), 0., float(y), self.tol)
        return min(value, 1.)

