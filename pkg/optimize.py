"""
Joint search over the small cell bias and the partitioning fraction, the
density study built on it, and numeric checks of how the bias affects SINR
coverage in the closed form (alpha = 4, no noise) setting.
"""
import math
from dataclasses import dataclass
from functools import partial
from typing import List, NamedTuple, Sequence

import numpy as np
import pandas as pd
from scipy import optimize

from data.config import NetworkConfig
from layers.functions.closed_form import ClosedFormParams, q4, sinr_coverage_alpha4_closed
from layers.functions.coverage import sinr_coverage
from layers.functions.rate import RateModel, rate_coverage_mean_load, rate_percentile
from utils.errors import ConfigError, ConvergenceError, DomainError, HetNetError
from utils.functions import ProgressBar
from utils.workers import parallel_map

# Largest finite difference derivative of S^w in b that still counts as <= 0
CLAIM1_TOL = 1e-9
# Relative step of the central differences in b
FD_STEP = 1e-5


# ----------------------- JOINT SEARCH ----------------------- #

class SweepSpec(NamedTuple):
    bias_db: tuple
    eta: tuple
    objective: str = 'rate_coverage'
    rho_bps: float = 250e3
    quantile: float = 0.05
    path: str = 'full'

    @classmethod
    def from_cfg(cls, cfg:NetworkConfig) -> 'SweepSpec':
        sw = cfg.sweep
        sweep = cls(tuple(float(b) for b in sw.bias_db), tuple(float(e) for e in sw.eta),
                   sw.objective, float(sw.rho_bps), float(sw.quantile), sw.path)
        sweep.check()
        return sweep

    def check(self):
        if len(self.bias_db) == 0:
            raise ConfigError('sweep.bias_db', 'grid is empty')
        if any(not b >= 0 for b in self.bias_db):
            raise ConfigError('sweep.bias_db', 'biases must be >= 0 dB')
        if len(self.eta) == 0:
            raise ConfigError('sweep.eta', 'grid is empty')
        if any(not 0 <= e < 1 for e in self.eta):
            raise ConfigError('sweep.eta', 'values must be in [0, 1)')
        if self.objective not in ('rate_coverage', 'percentile', 'median'):
            raise ConfigError('sweep.objective', 'unknown objective %r' % (self.objective,))
        if self.path not in ('full', 'mean_load', 'backhaul'):
            raise ConfigError('sweep.path', 'unknown path %r' % (self.path,))
        if self.objective == 'rate_coverage' and not self.rho_bps > 0:
            raise ConfigError('sweep.rho_bps', 'must be > 0')
        if self.objective == 'percentile' and not 0 < self.quantile < 1:
            raise ConfigError('sweep.quantile', 'must be in (0, 1)')

    def cells(self) -> List[tuple]:
        """ (bias_db, eta) in evaluation order: bias ascending, then eta ascending. """
        return [(b, e) for b in sorted(self.bias_db) for e in sorted(self.eta)]


def evaluate_objective(cfg:NetworkConfig, sweep:SweepSpec, model:RateModel=None) -> float:
    """ The sweep objective at cfg's own bias and eta. """
    if sweep.objective == 'rate_coverage':
        if sweep.path == 'mean_load':
            return rate_coverage_mean_load(cfg, sweep.rho_bps).total
        if model is None:
            model = RateModel(cfg)
        return model.evaluate(sweep.rho_bps, sweep.path).total

    q = sweep.quantile if sweep.objective == 'percentile' else 0.5
    return rate_percentile(cfg, q, path=sweep.path, model=model).rho


@dataclass
class SurfaceCell:
    bias_db: float
    eta: float
    objective: float
    offload_fraction: float
    failed: bool
    message: str = ''


def _evaluate_cell(cfg:NetworkConfig, sweep:SweepSpec, cell:tuple) -> SurfaceCell:
    bias_db, eta = cell
    cell_cfg = cfg.with_bias(bias_db).with_eta(eta)
    try:
        model = RateModel(cell_cfg)
        value = evaluate_objective(cell_cfg, sweep, model)
    except HetNetError as e:
        return SurfaceCell(bias_db, eta, math.nan, math.nan, True, str(e))
    return SurfaceCell(bias_db, eta, float(value), float(model.assoc.a2), False)


class OptimizeResult(NamedTuple):
    bias_db: float
    eta: float
    objective: float
    offload_fraction: float
    surface: List[SurfaceCell]

    def surface_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'bias_db'         : [c.bias_db for c in self.surface],
            'eta'             : [c.eta for c in self.surface],
            'objective'       : [c.objective for c in self.surface],
            'offload_fraction': [c.offload_fraction for c in self.surface],
            'failed'          : [int(c.failed) for c in self.surface],
        })

    @property
    def failed_cells(self) -> List[SurfaceCell]:
        return [c for c in self.surface if c.failed]


def optimize_joint(cfg:NetworkConfig, sweep:SweepSpec=None, threads:int=None, quiet:bool=True) -> OptimizeResult:
    """
    Evaluates the objective on every (bias, eta) cell and returns the best one.
    Ties go to the smaller bias, then the smaller eta. Cells whose evaluation
    raised are kept in the surface as failed (NaN objective) and skipped.
    """
    cfg.require_two_tier()
    if sweep is None:
        sweep = SweepSpec.from_cfg(cfg)
    sweep.check()

    cells = sweep.cells()

    callback = None
    if not quiet:
        progress_bar = ProgressBar(30, len(cells))

        def callback(done, cell):
            progress_bar.set_val(done)
            extra = 'B = %5.1f dB, eta = %.2f' % (cell.bias_db, cell.eta)
            print(progress_bar.line('Cells', extra), end='', flush=True)
            if progress_bar.is_finished():
                print()

    surface = parallel_map(partial(_evaluate_cell, cfg, sweep), cells, threads, callback)

    best = None
    for cell in surface:
        if cell.failed:
            continue
        if best is None or cell.objective > best.objective:
            best = cell

    if best is None:
        raise ConvergenceError('every one of the %d grid cells failed, first: %s'
                               % (len(surface), surface[0].message))

    return OptimizeResult(best.bias_db, best.eta, best.objective, best.offload_fraction, surface)


class DensityPoint(NamedTuple):
    density_factor: float
    bias_db: float
    eta: float
    objective: float
    offload_fraction: float


def density_sweep(cfg:NetworkConfig, factors:Sequence[float], sweep:SweepSpec=None,
                  threads:int=None) -> List[DensityPoint]:
    """ Reruns optimize_joint with the small cell density set to factor * lam_1. """
    if sweep is None:
        sweep = SweepSpec.from_cfg(cfg)

    out = []
    for factor in factors:
        if not factor > 0:
            raise DomainError('density factor must be > 0, got %r' % (factor,))
        scaled = cfg.with_tier(2, density_per_km2=float(factor) * cfg.tier(1).density)
        res = optimize_joint(scaled, sweep, threads)
        out.append(DensityPoint(float(factor), res.bias_db, res.eta, res.objective, res.offload_fraction))
    return out


class BiasTrendPoint(NamedTuple):
    bias_db: float
    partitioned: float
    unpartitioned: float


def sinr_bias_trend(cfg:NetworkConfig, biases_db:Sequence[float], t:float=1.) -> List[BiasTrendPoint]:
    """ SINR coverage at linear threshold t against the bias, with and without partitioning. """
    eta = cfg.eta if cfg.partitioned else 0.5
    out = []
    for b in biases_db:
        biased = cfg.with_bias(b)
        out.append(BiasTrendPoint(float(b),
                                  sinr_coverage(biased.with_eta(eta), t).total,
                                  sinr_coverage(biased.with_eta(0.), t).total))
    return out


# ----------------------- BIAS CLAIMS ----------------------- #

def _coverage(a:float, p:float, b:float, t:float, partitioned:bool) -> float:
    return sinr_coverage_alpha4_closed(ClosedFormParams(a, p, b), t, partitioned)


def coverage_derivative(a:float, p:float, b:float, t:float, partitioned:bool=False) -> float:
    """
    Derivative of the closed form SINR coverage in b, step FD_STEP * b. Central
    difference away from b = 1; within one step of it a second order forward
    difference, since the offloaded set is empty for b < 1.
    """
    h = FD_STEP * b
    f = partial(_coverage, a, p, t=t, partitioned=partitioned)
    if b - h < 1:
        return (-3 * f(b=b) + 4 * f(b=b + h) - f(b=b + 2 * h)) / (2 * h)
    return (f(b=b + h) - f(b=b - h)) / (2 * h)


class Claim1Point(NamedTuple):
    a: float
    p: float
    b: float
    t: float
    derivative: float
    # Only t >= 1 is asserted, below that the sign is just reported
    asserted: bool


class Claim1Report(NamedTuple):
    points: List[Claim1Point]
    max_derivative: float
    passed: bool


def check_claim1(a_grid:Sequence[float], p_grid:Sequence[float], b_grid:Sequence[float],
                 t_grid:Sequence[float], tol:float=CLAIM1_TOL) -> Claim1Report:
    """
    Without partitioning a bias b >= 1 never helps SINR coverage when t >= 1:
    dS^w/db <= 0. Passes iff the largest derivative over the asserted points is <= tol.
    """
    points = []
    for a in a_grid:
        for p in p_grid:
            for t in t_grid:
                for b in b_grid:
                    if b < 1:
                        raise DomainError('bias grid must be >= 1, got %r' % (b,))
                    points.append(Claim1Point(a, p, b, t, coverage_derivative(a, p, b, t), t >= 1))

    asserted = [pt.derivative for pt in points if pt.asserted]
    max_derivative = max(asserted) if asserted else -math.inf
    return Claim1Report(points, max_derivative, max_derivative <= tol)


class BoundReport(NamedTuple):
    # P(x) = c4 x^4 + c3 x^3 + c2 x^2 + c1 x + c0 with x = sqrt(b)
    coefficients: tuple
    upper: float
    lower: float
    bias_bound: float
    v: float


def bias_upper_bound(a:float, p:float, t:float) -> BoundReport:
    """
    Upper bound on the bias maximizing partitioned SINR coverage. With
    arctan(x) ~ x the stationary points in x = sqrt(b) are the roots of a
    quartic; U bounds its positive root and L the magnitude of its negative
    roots, so b <= max(U^2, L^2). The bound shrinks as small cells get denser.
    """
    if not (a > 0 and p > 0 and t > 0):
        raise DomainError('a, p and t must be > 0, got %r' % ((a, p, t),))

    v = q4(t, 1.)
    if not v > 1:
        raise DomainError('v = %r, the bound needs v > 1' % (v,))

    s = a * math.sqrt(p)
    s2 = a * a * p
    w = v * v - 1.

    c4 = s2 * w
    c3 = 2 * s * v * (1. - t)
    c2 = -(w + s2 * t * (v * v + 2.))
    c1 = -4 * s * v * t
    c0 = -s2 * t * t - t

    quad_term  = (w + s2 * t * (v * v + 2.)) / c4
    cubic_term = 4 * s * v / c4
    const_term = (s2 * t * t + t) / c4
    lin_term   = 2 * s * v * abs(t - 1.) / c4

    if t <= 1:
        upper = max((3 * quad_term) ** 0.5, (3 * cubic_term) ** (1 / 3), (3 * const_term) ** 0.25)
        lower = max(3 * lin_term, (3 * quad_term) ** 0.5, (3 * const_term) ** 0.25)
    else:
        upper = max(4 * lin_term, (4 * quad_term) ** 0.5, (4 * cubic_term) ** (1 / 3), (4 * const_term) ** 0.25)
        lower = max((2 * quad_term) ** 0.5, (2 * const_term) ** 0.25)

    return BoundReport((c4, c3, c2, c1, c0), upper, lower, max(upper * upper, lower * lower), v)


def brute_force_bias(a:float, p:float, t:float, b_min:float=1e-2, b_max:float=1e4, points:int=6001) -> float:
    """ argmax_b of the exact partitioned closed form: log grid, then a bounded refinement. """
    grid = np.geomspace(b_min, b_max, points)
    values = np.array([_coverage(a, p, b, t, True) for b in grid])
    i = int(np.argmax(values))

    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, points - 1)]
    if hi - lo <= 0:
        return float(grid[i])
    res = optimize.minimize_scalar(lambda b: -_coverage(a, p, b, t, True), bounds=(lo, hi), method='bounded',
                                   options={'xatol': 1e-10 * hi})
    return float(res.x) if -res.fun >= values[i] else float(grid[i])


class Claim3Report(NamedTuple):
    s_b1: float
    s_binf: float
    margin: float
    # The simplified difference written with a in place of a sqrt(p); only its sign is checked
    margin_printed: float


def check_claim3(a:float, p:float, t:float) -> Claim3Report:
    """
    Partitioned SINR coverage with no bias against the limit of infinite bias,
    where every macro user is offloaded. The margin is positive whenever v > 1.
    """
    if not (a > 0 and p > 0 and t > 0):
        raise DomainError('a, p and t must be > 0, got %r' % ((a, p, t),))

    s = a * math.sqrt(p)
    v = q4(t, 1.)

    s_b1 = _coverage(a, p, 1., t, True)
    s_binf = 1. / (v + v / s) + 1. / v - 1. / (v + 1. / s)
    margin_printed = (v * v - v) / (v * (v + 1. / a) * (v + a * v))

    return Claim3Report(s_b1, s_binf, s_b1 - s_binf, margin_printed)


# ----------------------- CLAIMS SUITE ----------------------- #

CLAIM1_A = (1., 5., 20.)
CLAIM1_P = (1e-2, 1e-1)
CLAIM1_T = (0.5, 1., 2., 5., 10.)
CLAIM1_B = tuple(np.geomspace(1., 100., 21))

CLAIM2_A = (1., 2., 5., 10., 20.)
CLAIM2_P = (1e-2,)
CLAIM2_T = (0.5, 1., 2.)
# The bound comes from an arctan approximation, it is only held against the exact argmax here
CLAIM2_ASSERTED_T = (0.5,)

CLAIM3_POINTS = 200


class ClaimsReport(NamedTuple):
    claim1: Claim1Report
    claim2: pd.DataFrame
    claim3: pd.DataFrame
    claim2_passed: bool
    claim3_passed: bool

    @property
    def passed(self) -> bool:
        return self.claim1.passed and self.claim2_passed and self.claim3_passed

    def claim1_frame(self) -> pd.DataFrame:
        return pd.DataFrame([pt._asdict() for pt in self.claim1.points]).assign(
            asserted=lambda f: f.asserted.astype(int))


def run_claims(seed:int=0) -> ClaimsReport:
    """
    Claim checks on fixed grids, plus random (a, p, t) draws for the infinite
    bias margin: a in [0.5, 50] and p in [1e-4, 1] log-uniform, t in [0.1, 10].
    """
    claim1 = check_claim1(CLAIM1_A, CLAIM1_P, CLAIM1_B, CLAIM1_T)

    rows = []
    for p in CLAIM2_P:
        for t in CLAIM2_T:
            for a in CLAIM2_A:
                bound = bias_upper_bound(a, p, t)
                rows.append({'a': a, 'p': p, 't': t, 'upper': bound.upper, 'lower': bound.lower,
                             'bias_bound': bound.bias_bound, 'brute_force_bias': brute_force_bias(a, p, t)})
    claim2 = pd.DataFrame(rows)

    held = claim2[claim2.t.isin(CLAIM2_ASSERTED_T)]
    claim2_passed = bool(np.all(held.bias_bound >= held.brute_force_bias))
    for _, group in claim2.groupby(['p', 't']):
        bounds = group.sort_values('a').bias_bound.to_numpy()
        claim2_passed &= bool(np.all(np.diff(bounds) < 0))

    rng = np.random.default_rng(seed)
    a_draws = 10 ** rng.uniform(math.log10(0.5), math.log10(50.), CLAIM3_POINTS)
    p_draws = 10 ** rng.uniform(-4., 0., CLAIM3_POINTS)
    t_draws = rng.uniform(0.1, 10., CLAIM3_POINTS)

    rows = []
    for a, p, t in zip(a_draws, p_draws, t_draws):
        rep = check_claim3(float(a), float(p), float(t))
        rows.append({'a': a, 'p': p, 't': t, **rep._asdict()})
    claim3 = pd.DataFrame(rows)
    claim3_passed = bool(np.all(claim3.margin > 0) and np.all(claim3.margin_printed > 0))

    return ClaimsReport(claim1, claim2, claim3, claim2_passed, claim3_passed)
