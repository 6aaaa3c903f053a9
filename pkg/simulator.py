"""
Monte Carlo simulator for the biased, partitioned HetNet.

Each drop scatters the APs of every tier and the users as homogeneous PPPs
over a square window centered at the origin, and puts a probe user at the
origin. The probe associates with the tier maximizing P_k B_k x_k^-alpha_k,
sees Rayleigh fading on every link, and shares its AP with the users the
same rule sends there. Drops are independent and seeded from one master seed.
"""
import math
from dataclasses import dataclass
from functools import partial
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import spatial, stats

from data.config import NetworkConfig, UserClass
from layers.functions.rate import LoadPmf
from layers.output_utils import CcdfCurve
from utils.errors import DomainError, InsufficientSamplesError
from utils.functions import MovingAverage, ProgressBar
from utils.workers import parallel_map

# Window side, in units of the typical macro inter-site distance 1/sqrt(lam_1), below which edges bite
MIN_WINDOW_SPACINGS = 10.
# Normal approximation quantile for 95% intervals
Z95 = 1.96


@dataclass
class Realization:
    """
    One drop. ap_points[k] are the (n_k, 2) positions of tier k + 1 in km,
    fading[k] the exponential power gain from each of them to the probe and
    active[k] whether it transmits. The probe sits at the origin and is not
    part of user_points.
    """
    window: float
    ap_points: List[np.ndarray]
    fading: List[np.ndarray]
    active: List[np.ndarray]
    user_points: np.ndarray
    # (entropy, spawn_key) of the SeedSequence this drop came from
    seed: Tuple
    window_warning: bool = False

    @property
    def probe(self) -> np.ndarray:
        return np.zeros(2)

    @property
    def num_tiers(self) -> int:
        return len(self.ap_points)


@dataclass
class ProbeResult:
    serving_tier: int
    offloaded: bool
    serving_distance: float
    sinr: float
    # SINR with every tier interfering, i.e. what the probe would see without a muted macro tier
    sinr_unmuted: float
    # K_l: users sharing the probe's resources, probe included
    load: int
    # Everyone at the tagged AP regardless of class, probe included
    load_total: int
    rate: float
    rate_backhaul: float

    @property
    def user_class(self) -> Optional[UserClass]:
        if self.serving_tier == 1:
            return UserClass.MACRO
        if self.serving_tier == 2:
            return UserClass.OFFLOADED if self.offloaded else UserClass.SMALL_UNBIASED
        return None


def min_window(cfg:NetworkConfig) -> float:
    return MIN_WINDOW_SPACINGS / math.sqrt(cfg.tier(1).density)


def _seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def sample_realization(cfg:NetworkConfig, window:float=None, seed=None) -> Realization:
    """
    Draws one network. seed is an int or a SeedSequence; the same (cfg, window,
    seed) always gives the same realization. Counts are Poisson with mean
    lam * window^2 and points are uniform given the count.
    """
    if window is None:
        window = cfg.mc.window_km
    if not window > 0:
        raise DomainError('window must be > 0, got %r' % (window,))

    seq = _seed_sequence(seed)
    rng = np.random.default_rng(seq)
    half = window / 2
    area = window * window

    ap_points, fading, active = [], [], []
    for tier in cfg.tiers:
        n = rng.poisson(tier.density * area)
        ap_points.append(rng.uniform(-half, half, size=(n, 2)))
        fading.append(rng.exponential(1., size=n))
        active.append(rng.random(n) < tier.activity)

    users = rng.uniform(-half, half, size=(rng.poisson(cfg.user_density * area), 2))

    return Realization(window, ap_points, fading, active, users,
                       (seq.entropy, tuple(seq.spawn_key)), window < min_window(cfg))


def _associate(points:np.ndarray, trees:List, power, bias, ple):
    """ Serving tier (0-based), AP index and per tier (distance, index) of the nearest APs for points. """
    n = len(points)
    dist = np.full((len(trees), n), np.inf)
    idx  = np.full((len(trees), n), -1, dtype=int)
    for k, tree in enumerate(trees):
        if tree is None:
            continue
        dist[k], idx[k] = tree.query(points)

    with np.errstate(divide='ignore'):
        biased = power[:, None] * bias[:, None] * dist ** -ple[:, None]
    serving = np.argmax(biased, axis=0)
    return serving, dist, idx, biased


def _is_offloaded(j:int, dist:np.ndarray, biased:np.ndarray, power, ple) -> np.ndarray:
    """ Served by tier j + 1 but only because of the bias: P_j x_j^-a_j <= max_{k != j} P_k B_k x_k^-a_k. """
    if j == 0:
        return np.zeros(dist.shape[1], dtype=bool)
    with np.errstate(divide='ignore'):
        unbiased = power[j] * dist[j] ** -ple[j]
    others = np.delete(biased, j, axis=0).max(axis=0)
    return ~(unbiased > others)


def evaluate_probe(r:Realization, cfg:NetworkConfig) -> ProbeResult:
    """
    Associates, classifies and serves the probe at the origin. Offloaded probes
    do not see the macro tier when resources are partitioned. The load counts
    users of the probe's own class at the tagged AP when partitioned, everyone
    there otherwise.
    """
    power = np.array([t.power for t in cfg.tiers])
    bias  = np.array([t.bias for t in cfg.tiers])
    ple   = np.array([float(t.ple) for t in cfg.tiers])

    trees = [spatial.cKDTree(pts) if len(pts) else None for pts in r.ap_points]
    serving, dist, idx, biased = _associate(r.probe[None, :], trees, power, bias, ple)
    j, i = int(serving[0]), int(idx[serving[0], 0])
    if i < 0:
        raise DomainError('no access point in the window')
    offloaded = bool(_is_offloaded(j, dist, biased, power, ple)[0])

    # Received power from every AP, fading included
    rx = []
    for k, pts in enumerate(r.ap_points):
        d = np.hypot(pts[:, 0], pts[:, 1])
        rx.append(np.where(r.active[k], power[k] * r.fading[k] * d ** -ple[k], 0.))

    signal = power[j] * r.fading[j][i] * dist[j, 0] ** -ple[j]
    interference = [float(np.sum(x)) for x in rx]
    interference[j] -= rx[j][i]

    muted = offloaded and cfg.partitioned
    noise = cfg.noise
    total = max(sum(interference), 0.)
    sinr_unmuted = signal / (noise + total)
    sinr = signal / (noise + max(total - interference[0], 0.)) if muted else sinr_unmuted

    # Everyone else at the tagged AP
    if len(r.user_points):
        u_serving, u_dist, u_idx, u_biased = _associate(r.user_points, trees, power, bias, ple)
        at_ap = (u_serving == j) & (u_idx[j] == i)
        n_offloaded = int(np.sum(_is_offloaded(j, u_dist, u_biased, power, ple)[at_ap]))
        n_here = int(np.sum(at_ap))
    else:
        n_offloaded = n_here = 0

    load_total = n_here + 1
    if j == 0 or not cfg.partitioned:
        load = load_total
    elif offloaded:
        load = n_offloaded + 1
    else:
        load = n_here - n_offloaded + 1

    if not cfg.partitioned:
        divisor = 1.
    elif offloaded:
        divisor = 1. / cfg.eta
    else:
        divisor = 1. / (1. - cfg.eta)

    rate = cfg.bandwidth / (divisor * load) * math.log2(1. + sinr)
    rate_backhaul = min(rate, cfg.tier(j + 1).backhaul / load_total)

    return ProbeResult(j + 1, offloaded, float(dist[j, 0]), float(sinr), float(sinr_unmuted),
                       load, load_total, float(rate), float(rate_backhaul))


def _simulate_drop(cfg:NetworkConfig, window:float, seed:np.random.SeedSequence) -> ProbeResult:
    return evaluate_probe(sample_realization(cfg, window, seed), cfg)


def run_drops(cfg:NetworkConfig, drops:int=None, seed:int=None, window:float=None,
              threads:int=None, quiet:bool=True) -> List[ProbeResult]:
    """
    Runs independent drops and returns their probe results in drop order.
    Drop i is seeded with the i-th child of SeedSequence(seed), so the output
    does not depend on how many workers ran.
    """
    drops = cfg.mc.drops if drops is None else drops
    seed = cfg.mc.seed if seed is None else seed
    window = cfg.mc.window_km if window is None else window

    if window < min_window(cfg):
        print('Warning: a %g km window is below %g km, edge effects will bias the results.'
              % (window, min_window(cfg)))

    seeds = np.random.SeedSequence(seed).spawn(drops)

    callback = None
    if not quiet:
        progress_bar = ProgressBar(30, drops)
        coverage_avg = MovingAverage()

        def callback(done, res):
            coverage_avg.add(float(res.sinr > 1.))
            progress_bar.set_val(done)
            print(progress_bar.line('Drops', 'P(SINR > 0 dB) ~ %.3f' % coverage_avg.get_avg()), end='', flush=True)
            if progress_bar.is_finished():
                print()

    return parallel_map(partial(_simulate_drop, cfg, window), seeds, threads, callback)


# ----------------------- ESTIMATORS ----------------------- #

def _metric(results:Sequence[ProbeResult], metric:str) -> np.ndarray:
    if metric not in ('sinr', 'sinr_unmuted', 'rate', 'rate_backhaul'):
        raise DomainError('unknown metric %r' % (metric,))
    return np.array([getattr(r, metric) for r in results], dtype=float)


def empirical_ccdf(results:Sequence[ProbeResult], thresholds:Sequence[float], metric:str='sinr',
                   min_samples:int=100) -> CcdfCurve:
    """
    Fraction of probes whose metric exceeds each threshold (linear SINR or
    bits/s), with 95% normal approximation halfwidths. Only the sorted values
    enter, so the order of results does not matter.
    """
    values = np.sort(_metric(results, metric))
    n = len(values)
    if n < min_samples:
        raise InsufficientSamplesError(min_samples, n, 'probe results')

    thresholds = np.asarray(thresholds, dtype=float)
    p = (n - np.searchsorted(values, thresholds, side='right')) / n
    halfwidths = Z95 * np.sqrt(p * (1. - p) / n)

    return CcdfCurve(thresholds, p, 'sinr' if metric.startswith('sinr') else 'rate', halfwidths=halfwidths)


class LoadHistogram(NamedTuple):
    user_class: UserClass
    loads: np.ndarray
    probabilities: np.ndarray
    samples: int

    @property
    def mean(self) -> float:
        return float(np.dot(self.loads, self.probabilities))


def empirical_load_pmf(results:Sequence[ProbeResult], user_class:UserClass,
                       min_samples:int=1000) -> LoadHistogram:
    """ Normalized histogram of the tagged AP load over the probes of one class. """
    loads = np.array([r.load for r in results if r.user_class is user_class], dtype=int)
    if len(loads) < min_samples:
        raise InsufficientSamplesError(min_samples, len(loads), 'probes of class %s' % user_class.value)

    counts = np.bincount(loads)[1:]
    return LoadHistogram(user_class, np.arange(1, len(counts) + 1), counts / len(loads), len(loads))


def class_frequencies(results:Sequence[ProbeResult]) -> Dict[UserClass, Tuple[float, float]]:
    """ (fraction, 95% halfwidth) of the probes in each two tier class. """
    n = len(results)
    if n == 0:
        raise InsufficientSamplesError(1, 0, 'probe results')

    out = {}
    for l in UserClass:
        p = sum(r.user_class is l for r in results) / n
        out[l] = (p, Z95 * math.sqrt(p * (1. - p) / n))
    return out


def total_variation(pmf:LoadPmf, hist:LoadHistogram) -> float:
    """ Total variation distance between an analytic load PMF and a histogram. """
    size = max(pmf.n_max, len(hist.loads))
    p = np.zeros(size)
    q = np.zeros(size)
    p[:pmf.n_max] = pmf.masses
    q[:len(hist.loads)] = hist.probabilities
    return 0.5 * (float(np.sum(np.abs(p - q))) + pmf.tail_mass)


def ks_distance(samples:Sequence[float], cdf:Callable[[float], float]) -> float:
    """ Kolmogorov-Smirnov statistic of samples against a scalar CDF. """
    return float(stats.kstest(np.asarray(samples, dtype=float), np.vectorize(cdf)).statistic)
