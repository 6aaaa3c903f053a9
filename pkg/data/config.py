import json
import math
from enum import Enum

import numpy as np

from utils.errors import ConfigError
from utils.functions import db2lin, dbm2mw

VERSION = '1.0.1'

# Shape parameter of the gamma fit to the Poisson-Voronoi cell area
VORONOI_SHAPE = 3.5

# E[C^2(1)] used by the mean load approximation. Note the load PMF itself has
# mean 1 + c * 4.5 / 3.5, i.e. a factor of ~1.2857. The two are kept apart.
MEAN_LOAD_FACTOR = 1.28



# ----------------------- CONFIG CLASS ----------------------- #

class Config(object):
    """
    Holds the configuration for anything you want it to.
    To get the currently active config, import cfg from data.

    To use, just do cfg.x instead of cfg['x'].
    """

    def __init__(self, config_dict):
        for key, val in config_dict.items():
            self.__setattr__(key, val)

    def copy(self, new_config_dict={}):
        """
        Copies this config into a new config object of the same type,
        making the changes given by new_config_dict.
        """
        ret = type(self)(vars(self))

        for key, val in new_config_dict.items():
            ret.__setattr__(key, val)

        return ret

    def replace(self, new_config_dict):
        """
        Copies new_config_dict into this config object.
        Note: new_config_dict can also be a config object.
        """
        if isinstance(new_config_dict, Config):
            new_config_dict = vars(new_config_dict)

        for key, val in new_config_dict.items():
            self.__setattr__(key, val)

    def to_dict(self) -> dict:
        """ Plain (json-serializable) view of this config, nested configs included. """
        def unwrap(val):
            if isinstance(val, Config):
                return val.to_dict()
            if isinstance(val, (list, tuple)):
                return [unwrap(x) for x in val]
            return val

        return {k: unwrap(v) for k, v in vars(self).items()}

    def __eq__(self, other):
        return isinstance(other, Config) and self.to_dict() == other.to_dict()

    def __repr__(self):
        return '%s(%s)' % (type(self).__name__, self.to_dict())





# ----------------------- TIERS ----------------------- #

class TierConfig(Config):
    """
    One tier of access points. Raw keys follow the experiment file:
      density_per_km2, tx_power_dbm, bias_db, ple, backhaul_mbps, activity
    and the properties below give the linear values the formulas use.
    """

    @property
    def density(self) -> float:
        return float(self.density_per_km2)

    @property
    def power(self) -> float:
        """ Transmit power in mW. """
        return db2lin(self.tx_power_dbm)

    @property
    def bias(self) -> float:
        return db2lin(self.bias_db)

    @property
    def backhaul(self) -> float:
        """ Backhaul bandwidth in bits/s, inf when the tier has none configured. """
        if self.backhaul_mbps is None:
            return math.inf
        return float(self.backhaul_mbps) * 1e6


tier_base = TierConfig({
    # Access points per km^2
    'density_per_km2': 1.0,
    # Transmit power in dBm
    'tx_power_dbm': 46.0,
    # Association bias in dB. Must be 0 for the macro tier
    'bias_db': 0.0,
    # Path loss exponent, has to be > 2
    'ple': 4.0,
    # Backhaul bandwidth in Mbps. None means unlimited
    'backhaul_mbps': None,
    # Probability an AP is transmitting. Only thins interference, never association
    'activity': 1.0,
})

macro_tier = tier_base.copy({
    'density_per_km2': 1.0,
    'tx_power_dbm': 46.0,
    'ple': 3.5,
})

pico_tier = tier_base.copy({
    'density_per_km2': 5.0,
    'tx_power_dbm': 26.0,
    'bias_db': 10.0,
    'ple': 4.0,
})

femto_tier = tier_base.copy({
    'density_per_km2': 10.0,
    'tx_power_dbm': 20.0,
    'bias_db': 5.0,
    'ple': 4.0,
})





# ----------------------- EXPERIMENT SETTINGS ----------------------- #

sinr_thresholds = Config({
    # 'sinr_db' or 'rate_bps'
    'kind': 'sinr_db',
    'start': -10.0,
    'stop': 20.0,
    'points': 31,
    # 'linear' or 'log' spacing between start and stop
    'scale': 'linear',
})

rate_thresholds = sinr_thresholds.copy({
    'kind': 'rate_bps',
    'start': 1e4,
    'stop': 1e7,
    'points': 20,
    'scale': 'log',
})

mc_base = Config({
    # Side of the square simulation window in km. Should be >= 10 / sqrt(macro density)
    'window_km': 20.0,
    # Number of independent network drops (one probe user each)
    'drops': 2000,
    # Master seed, every drop gets its own child seed from it
    'seed': 42,
})

sweep_base = Config({
    # Grid of small cell biases (dB) and partitioning fractions. eta = 0 means no partitioning.
    'bias_db': [2.5 * i for i in range(9)],
    'eta': [round(0.05 * i, 2) for i in range(1, 19)],

    # 'rate_coverage' at rho_bps, 'percentile' at quantile, or 'median'
    'objective': 'rate_coverage',
    'rho_bps': 250e3,
    'quantile': 0.05,

    # Which analytic rate model feeds the objective: 'full', 'mean_load' or 'backhaul'
    'path': 'full',

    # Optional: rerun the search with the small cell density scaled by each factor
    'density_factors': [],
})





# ----------------------- NETWORK ----------------------- #

class NetworkConfig(Config):
    """
    A full scenario. tiers[0] is the macro tier, and everything that talks
    about "tier j" in this package counts from 1 to match that.
    """

    @property
    def user_density(self) -> float:
        return float(self.user_density_per_km2)

    @property
    def bandwidth(self) -> float:
        return float(self.bandwidth_hz)

    @property
    def noise(self) -> float:
        """ Noise power in mW, 0 for an interference limited network. """
        return dbm2mw(self.noise_dbm)

    @property
    def num_tiers(self) -> int:
        return len(self.tiers)

    @property
    def partitioned(self) -> bool:
        return self.eta > 0

    def tier(self, j:int) -> TierConfig:
        return self.tiers[j - 1]

    def require_two_tier(self):
        if self.num_tiers != 2:
            raise ConfigError('tiers', 'this operation needs exactly 2 tiers, got %d' % self.num_tiers)

    def with_tier(self, j:int, **changes):
        """ Returns a copy where tier j got the given raw keys replaced. """
        tiers = [t.copy() for t in self.tiers]
        tiers[j - 1] = tiers[j - 1].copy(changes)
        return self.copy({'tiers': tiers})

    def with_bias(self, bias_db:float, j:int=2):
        return self.with_tier(j, bias_db=float(bias_db))

    def with_eta(self, eta:float):
        return self.copy({'eta': float(eta)})


network_base = NetworkConfig({
    'name': 'base',

    'tiers': [macro_tier, pico_tier],

    # Users per km^2
    'user_density_per_km2': 100.0,
    # System bandwidth in Hz. Rate thresholds only make sense relative to this
    'bandwidth_hz': 10e6,
    # Noise power in dBm. None for an interference limited network
    'noise_dbm': -10.0,
    # Fraction of resources where the macro tier is muted. 0 turns partitioning off
    'eta': 0.5,

    'thresholds': rate_thresholds,
    'mc': mc_base,
    'sweep': sweep_base,

    'mean_load_factor': MEAN_LOAD_FACTOR,
    # Absolute tolerance handed to the quadrature
    'tolerance': 1e-8,
})

# The two tier setup used to check the analysis against simulation
validation_config = network_base.copy({
    'name': 'validation',
})

# alpha = 4 everywhere and no noise, where the closed forms hold
alpha4_config = validation_config.copy({
    'name': 'alpha4',
    'tiers': [macro_tier.copy({'ple': 4.0}), pico_tier.copy()],
    'noise_dbm': None,
})

backhaul_config = validation_config.copy({
    'name': 'backhaul',
    'tiers': [macro_tier.copy(), pico_tier.copy({'backhaul_mbps': 5.0})],
    'eta': 0.0,
})

ktier_config = validation_config.copy({
    'name': 'ktier',
    'tiers': [macro_tier.copy(), pico_tier.copy({'bias_db': 5.0}), femto_tier.copy()],
    'thresholds': sinr_thresholds,
})


# ----------------------- USER CLASSES ----------------------- #

class UserClass(Enum):
    """
    The three disjoint user sets of the two tier model:
      MACRO           served by the macro tier
      SMALL_UNBIASED  served by a small cell that is also its strongest AP
      OFFLOADED       served by a small cell only because of the bias
    """
    MACRO          = '1'
    SMALL_UNBIASED = 'Bbar'
    OFFLOADED      = 'B'

    @property
    def serving_tier(self) -> int:
        return 1 if self is UserClass.MACRO else 2

    @property
    def column(self) -> str:
        return {'1': 'class_macro', 'Bbar': 'class_small', 'B': 'class_offloaded'}[self.value]

    def resource_divisor(self, eta:float) -> float:
        """
        G_l, the inverse of the fraction of resources the class is served on.
        Without partitioning every class gets everything.
        """
        if eta == 0:
            return 1.
        if self is UserClass.OFFLOADED:
            return 1. / eta
        return 1. / (1. - eta)


class NormalizedParams(object):
    """
    Tier parameters divided by those of the serving tier j:
    p_hat = P_k / P_j, b_hat = B_k / B_j, a_hat = alpha_k / alpha_j.
    """

    def __init__(self, cfg:NetworkConfig, j:int):
        power = np.array([t.power for t in cfg.tiers])
        bias  = np.array([t.bias  for t in cfg.tiers])
        ple   = np.array([float(t.ple) for t in cfg.tiers])

        self.j = j
        self.p_hat = power / power[j - 1]
        self.b_hat = bias  / bias[j - 1]
        self.a_hat = ple   / ple[j - 1]

        # Ratios of a tier with itself are exactly 1, not 1 up to rounding
        self.p_hat[j - 1] = self.b_hat[j - 1] = self.a_hat[j - 1] = 1.





# ----------------------- VALIDATION / IO ----------------------- #

_TIER_REQUIRED    = ('density_per_km2', 'tx_power_dbm', 'ple')
_NETWORK_REQUIRED = ('tiers', 'user_density_per_km2', 'bandwidth_hz', 'noise_dbm', 'eta')

def _number(key, val, lo=None, hi=None, lo_open=True, hi_open=True):
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
        raise ConfigError(key, 'expected a finite number, got %r' % (val,))
    if lo is not None and (val < lo or (lo_open and val == lo)):
        raise ConfigError(key, 'must be %s %g, got %g' % ('>' if lo_open else '>=', lo, val))
    if hi is not None and (val > hi or (hi_open and val == hi)):
        raise ConfigError(key, 'must be %s %g, got %g' % ('<' if hi_open else '<=', hi, val))

def validate_cfg(cfg:NetworkConfig):
    """ Raises ConfigError naming the first offending key. Returns cfg for chaining. """
    if len(cfg.tiers) < 2:
        raise ConfigError('tiers', 'need at least 2 tiers, got %d' % len(cfg.tiers))

    for i, tier in enumerate(cfg.tiers):
        path = 'tiers[%d].' % i
        _number(path + 'density_per_km2', tier.density_per_km2, lo=0)
        _number(path + 'tx_power_dbm', tier.tx_power_dbm)
        _number(path + 'bias_db', tier.bias_db, lo=None if i == 0 else 0, lo_open=False)
        _number(path + 'ple', tier.ple, lo=2)
        _number(path + 'activity', tier.activity, lo=0, hi=1, hi_open=False)
        if tier.backhaul_mbps is not None:
            _number(path + 'backhaul_mbps', tier.backhaul_mbps, lo=0)

    if cfg.tiers[0].bias_db != 0:
        raise ConfigError('tiers[0].bias_db', 'the macro tier bias is fixed at 0 dB')

    _number('user_density_per_km2', cfg.user_density_per_km2, lo=0)
    _number('bandwidth_hz', cfg.bandwidth_hz, lo=0)
    if cfg.noise_dbm is not None:
        _number('noise_dbm', cfg.noise_dbm)
    _number('eta', cfg.eta, lo=0, hi=1, lo_open=False)
    _number('mean_load_factor', cfg.mean_load_factor, lo=0)
    _number('tolerance', cfg.tolerance, lo=0)

    th = cfg.thresholds
    if th.kind not in ('sinr_db', 'rate_bps'):
        raise ConfigError('thresholds.kind', 'expected sinr_db or rate_bps, got %r' % (th.kind,))
    if th.scale not in ('linear', 'log'):
        raise ConfigError('thresholds.scale', 'expected linear or log, got %r' % (th.scale,))
    if not isinstance(th.points, int) or th.points < 1:
        raise ConfigError('thresholds.points', 'expected a positive integer, got %r' % (th.points,))
    _number('thresholds.start', th.start)
    _number('thresholds.stop', th.stop)
    if th.stop < th.start:
        raise ConfigError('thresholds.stop', 'must not be below thresholds.start')
    if th.kind == 'rate_bps' and th.start < 0:
        raise ConfigError('thresholds.start', 'rates must be >= 0')
    if th.scale == 'log' and th.start <= 0:
        raise ConfigError('thresholds.start', 'log spacing needs start > 0')

    _number('mc.window_km', cfg.mc.window_km, lo=0)
    if not isinstance(cfg.mc.drops, int) or cfg.mc.drops < 1:
        raise ConfigError('mc.drops', 'expected a positive integer, got %r' % (cfg.mc.drops,))
    if not isinstance(cfg.mc.seed, int) or cfg.mc.seed < 0:
        raise ConfigError('mc.seed', 'expected a non-negative integer, got %r' % (cfg.mc.seed,))

    sw = cfg.sweep
    if len(sw.bias_db) == 0:
        raise ConfigError('sweep.bias_db', 'grid is empty')
    if len(sw.eta) == 0:
        raise ConfigError('sweep.eta', 'grid is empty')
    for b in sw.bias_db:
        _number('sweep.bias_db', b, lo=0, lo_open=False)
    for eta in sw.eta:
        _number('sweep.eta', eta, lo=0, hi=1, lo_open=False)
    if sw.objective not in ('rate_coverage', 'percentile', 'median'):
        raise ConfigError('sweep.objective', 'expected rate_coverage, percentile or median, got %r' % (sw.objective,))
    if sw.path not in ('full', 'mean_load', 'backhaul'):
        raise ConfigError('sweep.path', 'expected full, mean_load or backhaul, got %r' % (sw.path,))
    _number('sweep.rho_bps', sw.rho_bps, lo=0)
    _number('sweep.quantile', sw.quantile, lo=0, hi=1)
    for f in sw.density_factors:
        _number('sweep.density_factors', f, lo=0)

    return cfg


def config_from_dict(config_dict:dict, name:str=None) -> NetworkConfig:
    """
    Builds a NetworkConfig from the parsed experiment file. Optional sections
    (thresholds, mc, sweep) and optional tier keys fall back to the defaults above.
    """
    if not isinstance(config_dict, dict):
        raise ConfigError('<root>', 'expected a JSON object')

    for key in _NETWORK_REQUIRED:
        if key not in config_dict:
            raise ConfigError(key, 'missing required key')

    if not isinstance(config_dict['tiers'], list):
        raise ConfigError('tiers', 'expected a list of tier objects')

    tiers = []
    for i, tier_dict in enumerate(config_dict['tiers']):
        if not isinstance(tier_dict, dict):
            raise ConfigError('tiers[%d]' % i, 'expected an object')
        for key in _TIER_REQUIRED:
            if key not in tier_dict:
                raise ConfigError('tiers[%d].%s' % (i, key), 'missing required key')
        unknown = set(tier_dict) - set(vars(tier_base))
        if unknown:
            raise ConfigError('tiers[%d].%s' % (i, sorted(unknown)[0]), 'unknown key')
        tiers.append(tier_base.copy(tier_dict))

    sections = {}
    for key, default in (('thresholds', None), ('mc', mc_base), ('sweep', sweep_base)):
        section = config_dict.get(key, {})
        if not isinstance(section, dict):
            raise ConfigError(key, 'expected an object')
        if default is None:
            default = sinr_thresholds if section.get('kind') == 'sinr_db' else rate_thresholds
        unknown = set(section) - set(vars(default))
        if unknown:
            raise ConfigError('%s.%s' % (key, sorted(unknown)[0]), 'unknown key')
        sections[key] = default.copy(section)

    known = set(vars(network_base))
    unknown = set(config_dict) - known
    if unknown:
        raise ConfigError(sorted(unknown)[0], 'unknown key')

    top = {k: v for k, v in config_dict.items() if k not in ('tiers', 'thresholds', 'mc', 'sweep')}
    cfg = network_base.copy(top)
    cfg.replace(sections)
    cfg.tiers = tiers
    if name is not None and 'name' not in config_dict:
        cfg.name = name

    return validate_cfg(cfg)

def config_to_dict(cfg:NetworkConfig) -> dict:
    """ The inverse of config_from_dict. This is what the run manifest echoes. """
    return cfg.to_dict()

def load_config(path:str) -> NetworkConfig:
    """ Reads and validates a JSON experiment file. """
    try:
        with open(path, 'r') as f:
            config_dict = json.load(f)
    except OSError as e:
        raise ConfigError('--config', 'cannot read %s (%s)' % (path, e.strerror))
    except json.JSONDecodeError as e:
        raise ConfigError('--config', 'invalid JSON in %s: %s' % (path, e))

    name = path.replace('\\', '/').split('/')[-1].rsplit('.', 1)[0]
    return config_from_dict(config_dict, name=name)


def threshold_grid(thresholds:Config) -> np.ndarray:
    """ The ascending threshold values described by a thresholds section (dB or bits/s). """
    if thresholds.points == 1:
        return np.array([float(thresholds.start)])
    if thresholds.scale == 'log':
        return np.geomspace(thresholds.start, thresholds.stop, thresholds.points)
    return np.linspace(thresholds.start, thresholds.stop, thresholds.points)





# Default config
cfg = validation_config.copy()

def set_cfg(config_name:str):
    """ Sets the active config. Works even if cfg is already imported! """
    global cfg

    # Not just a lookup, so that things like validation_config.copy({'eta': 0.3}) work too
    cfg.replace(eval(config_name))

    if cfg.name is None:
        cfg.name = config_name.split('_config')[0]
