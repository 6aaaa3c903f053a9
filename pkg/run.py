"""
Command line front end. Resolves a config, runs one mode and writes its CSV
files, manifest.json and hetnet.log into --out.

    python run.py --config validation_config --mode rate --out results/
    python run.py --config data/configs/backhaul.json --mode validate --drops 2000 --seed 42

Exit codes: 0 success, 2 bad config or arguments outside a formula's domain,
3 numerical failure (non-convergence), 4 a failed check in claims mode.
"""
import os
import sys
import time
import argparse

import numpy as np
import pandas as pd

import data.config as config_module
from data import cfg, set_cfg
from data.config import (VERSION, NetworkConfig, UserClass, config_to_dict, load_config,
                         rate_thresholds, sinr_thresholds, threshold_grid, validate_cfg)
from layers.functions.association import association_probabilities, class_models
from layers.functions.coverage import ktier_sinr_coverage, ktier_sinr_coverage_total, sinr_coverage_curve
from layers.functions.rate import RateModel, mean_load, rate_coverage_curve, rate_percentile
from layers.output_utils import RunManifest
from simulator import (class_frequencies, empirical_ccdf, empirical_load_pmf, ks_distance,
                       run_drops, total_variation)
import optimize
from utils import timer
from utils.errors import (EXIT_CLAIMS, EXIT_CONFIG, EXIT_OK, ConfigError, HetNetError,
                          InsufficientSamplesError, exit_code)
from utils.functions import db2lin
from utils.logger import Log

MODES = ('sinr', 'rate', 'backhaul', 'validate', 'optimize', 'claims')


def str2bool(v):
    if v.lower() in ('yes', 'true', 't', 'y', '1'):
        return True
    elif v.lower() in ('no', 'false', 'f', 'n', '0'):
        return False
    else:
        raise argparse.ArgumentTypeError('Boolean value expected.')

def parse_args(argv=None):
    parser = argparse.ArgumentParser(
        description='Two tier HetNet coverage with biased offloading and resource partitioning')
    parser.add_argument('--config', default='validation_config', type=str,
                        help='A JSON experiment file, or the name of a preset in data/config.py.')
    parser.add_argument('--mode', default='rate', choices=MODES,
                        help='What to compute: analytic curves (sinr, rate, backhaul), analytic vs Monte Carlo '
                             '(validate), the joint bias / eta search (optimize) or the bias claims (claims).')
    parser.add_argument('--out', default='results/', type=str,
                        help='Directory the CSV files, manifest and log are written to.')
    parser.add_argument('--seed', default=None, type=int,
                        help='Master seed. Overrides mc.seed from the config.')
    parser.add_argument('--drops', default=None, type=int,
                        help='Number of Monte Carlo drops. Overrides mc.drops from the config.')
    parser.add_argument('--method', default='auto', choices=('auto', 'integral'),
                        help='auto uses closed forms wherever they hold, integral always integrates.')
    parser.add_argument('--ktier_variant', default='exact', choices=('exact', 'printed'),
                        help='Which form of the offloaded term to use with more than two tiers.')
    parser.add_argument('--progress', default=True, type=str2bool,
                        help='Show progress bars for the Monte Carlo and optimize modes.')
    parser.add_argument('--quiet', dest='quiet', action='store_true',
                        help='Print nothing but errors.')

    global args
    args = parser.parse_args(argv)

    if args.seed is not None and args.seed < 0:
        parser.error('--seed must be non-negative')
    if args.drops is not None and args.drops < 1:
        parser.error('--drops must be positive')

    return args


def resolve_config(name_or_path:str) -> NetworkConfig:
    """ JSON files are loaded and validated, anything else must name a NetworkConfig preset. """
    if name_or_path.endswith('.json') or os.path.exists(name_or_path):
        resolved = load_config(name_or_path)
    else:
        if not isinstance(getattr(config_module, name_or_path, None), NetworkConfig):
            raise ConfigError('--config', 'no preset or file named %r' % name_or_path)
        set_cfg(name_or_path)
        resolved = validate_cfg(cfg.copy())

    mc = {}
    if args.seed is not None:
        mc['seed'] = args.seed
    if args.drops is not None:
        mc['drops'] = args.drops
    if mc:
        resolved.mc = resolved.mc.copy(mc)

    return resolved


def sinr_grid_db(cfg:NetworkConfig) -> np.ndarray:
    """ The config's thresholds when they are SINR thresholds, the default SINR grid otherwise. """
    return threshold_grid(cfg.thresholds if cfg.thresholds.kind == 'sinr_db' else sinr_thresholds)

def rate_grid_bps(cfg:NetworkConfig) -> np.ndarray:
    return threshold_grid(cfg.thresholds if cfg.thresholds.kind == 'rate_bps' else rate_thresholds)


def say(*a, **kw):
    if not args.quiet:
        print(*a, **kw)


class Outputs:
    """ Writes CSV files into the output directory, recording them in the manifest and the log. """

    def __init__(self, out_dir:str, manifest:RunManifest, log:Log):
        self.out_dir = out_dir
        self.manifest = manifest
        self.log = log

    def write(self, name:str, frame:pd.DataFrame):
        self.manifest.add_csv(self.out_dir, name, frame)
        self.log.log('output', name=name, rows=len(frame), sha256=self.manifest.outputs[name])
        say('Wrote %s (%d rows)' % (os.path.join(self.out_dir, name), len(frame)))

    def summary(self, **kw):
        self.manifest.summary.update(kw)



# ----------------------- MODES ----------------------- #

def association_frame(cfg:NetworkConfig) -> pd.DataFrame:
    assoc = association_probabilities(cfg, args.method)
    return pd.DataFrame({
        'class'      : [l.value for l in UserClass],
        'probability': [assoc.of(l) for l in UserClass],
        'mean_load'  : [mean_load(cfg, l, assoc) for l in UserClass],
    })


def mode_sinr(cfg:NetworkConfig, out:Outputs) -> int:
    grid_db = sinr_grid_db(cfg)
    thresholds = db2lin(grid_db)

    if cfg.num_tiers == 2:
        with timer.env('sinr'):
            curve = sinr_coverage_curve(cfg, grid_db, args.method)
        out.write('sinr_coverage.csv', curve.to_frame('threshold_db', grid_db))
        out.write('association.csv', association_frame(cfg))
        out.summary(coverage_0db=float(np.interp(0., grid_db, curve.values)))
        return EXIT_OK

    rows, totals = [], []
    with timer.env('ktier'):
        for t_db, t in zip(grid_db, thresholds):
            total = 0.
            for j in range(1, cfg.num_tiers + 1):
                cov = ktier_sinr_coverage(cfg, j, float(t), args.ktier_variant, args.method)
                rows.append({'threshold_db': t_db, 'tier': j,
                             'class_unbiased': cov.s_unbiased, 'class_offloaded': cov.s_offloaded,
                             'weight_unbiased': cov.a_unbiased, 'weight_offloaded': cov.a_offloaded})
                total += cov.a_unbiased * (cov.s_unbiased or 0.) + cov.a_offloaded * (cov.s_offloaded or 0.)
            totals.append(total)

    frame = pd.DataFrame({'threshold_db': grid_db, 'coverage': totals})
    for l in UserClass:
        frame[l.column] = np.nan
    out.write('sinr_coverage.csv', frame)
    out.write('ktier_coverage.csv', pd.DataFrame(rows))
    return EXIT_OK


def mode_rate(cfg:NetworkConfig, out:Outputs) -> int:
    cfg.require_two_tier()
    grid = rate_grid_bps(cfg)

    with timer.env('rate'):
        model = RateModel(cfg, args.method)
        full = rate_coverage_curve(cfg, grid, 'full', model)
    with timer.env('rate_mean_load'):
        approx = rate_coverage_curve(cfg, grid, 'mean_load', model)

    out.write('rate_coverage.csv', full.to_frame('threshold_bps'))
    out.write('rate_mean_load.csv', approx.to_frame('threshold_bps'))

    rows = []
    for l in model.classes:
        pmf = model.pmfs[l]
        rows += [{'class': l.value, 'load': int(n), 'probability': p} for n, p in zip(pmf.loads, pmf.masses)]
    out.write('load_pmf.csv', pd.DataFrame(rows, columns=['class', 'load', 'probability']))

    with timer.env('percentiles'):
        rho95 = rate_percentile(cfg, 0.05, model=model)
        median = rate_percentile(cfg, 0.5, model=model)
    out.summary(rho95_bps=rho95.rho, rho95_bracketed=rho95.bracketed,
                median_bps=median.rho, median_bracketed=median.bracketed)
    say('5th percentile rate %.4g bps, median %.4g bps' % (rho95.rho, median.rho))
    return EXIT_OK


def mode_backhaul(cfg:NetworkConfig, out:Outputs) -> int:
    cfg.require_two_tier()
    grid = rate_grid_bps(cfg)

    with timer.env('backhaul'):
        model = RateModel(cfg, args.method)
        limited = rate_coverage_curve(cfg, grid, 'backhaul', model)
        unlimited = rate_coverage_curve(cfg, grid, 'full', model)

    frame = limited.to_frame('threshold_bps')
    frame['unlimited'] = unlimited.values
    out.write('backhaul_coverage.csv', frame)
    out.summary(max_backhaul_loss=float(np.max(unlimited.values - limited.values)))
    return EXIT_OK


def gap_frame(column:str, thresholds, analytic, empirical) -> pd.DataFrame:
    analytic = np.asarray(analytic, dtype=float)
    return pd.DataFrame({
        column      : thresholds,
        'analytic'  : analytic,
        'empirical' : empirical.values,
        'halfwidth' : empirical.halfwidths,
        'gap'       : np.abs(analytic - empirical.values),
    })


def mode_validate(cfg:NetworkConfig, out:Outputs) -> int:
    with timer.env('simulate'):
        results = run_drops(cfg, quiet=args.quiet or not args.progress)
    out.log.log('stage', name='simulate', drops=len(results), seed=cfg.mc.seed, window_km=cfg.mc.window_km)

    grid_db = sinr_grid_db(cfg)
    thresholds = db2lin(grid_db)
    with timer.env('sinr'):
        if cfg.num_tiers == 2:
            analytic = sinr_coverage_curve(cfg, grid_db, args.method).values
        else:
            analytic = [ktier_sinr_coverage_total(cfg, float(t), args.ktier_variant, args.method) for t in thresholds]
    sinr_gap = gap_frame('threshold_db', grid_db, analytic, empirical_ccdf(results, thresholds, 'sinr'))
    out.write('gap_sinr.csv', sinr_gap)
    out.summary(max_gap_sinr=float(sinr_gap.gap.max()))

    if cfg.num_tiers != 2:
        return EXIT_OK

    grid = rate_grid_bps(cfg)
    with timer.env('rate'):
        model = RateModel(cfg, args.method)
        rate = rate_coverage_curve(cfg, grid, 'full', model)
    rate_gap = gap_frame('threshold_bps', grid, rate.values, empirical_ccdf(results, grid, 'rate'))
    out.write('gap_rate.csv', rate_gap)
    out.summary(max_gap_rate=float(rate_gap.gap.max()))

    if any(np.isfinite(t.backhaul) for t in cfg.tiers):
        with timer.env('backhaul'):
            limited = rate_coverage_curve(cfg, grid, 'backhaul', model)
        backhaul_gap = gap_frame('threshold_bps', grid, limited.values, empirical_ccdf(results, grid, 'rate_backhaul'))
        out.write('gap_backhaul.csv', backhaul_gap)
        out.summary(max_gap_backhaul=float(backhaul_gap.gap.max()))

    rows, tv = [], {}
    for l in model.classes:
        try:
            hist = empirical_load_pmf(results, l)
        except InsufficientSamplesError as e:
            out.log.log('warning', stage='load', user_class=l.value, message=str(e))
            continue
        pmf = model.pmfs[l]
        empirical = dict(zip(hist.loads, hist.probabilities))
        for n in range(1, max(pmf.n_max, len(hist.loads)) + 1):
            rows.append({'class': l.value, 'load': n,
                         'analytic': pmf.masses[n - 1] if n <= pmf.n_max else 0.,
                         'empirical': empirical.get(n, 0.)})
        tv[l.value] = total_variation(pmf, hist)
    out.write('gap_load.csv', pd.DataFrame(rows, columns=['class', 'load', 'analytic', 'empirical']))

    freqs = class_frequencies(results)
    out.summary(load_total_variation=tv,
                class_frequencies={l.value: {'empirical': f, 'halfwidth': hw, 'analytic': model.assoc.of(l)}
                                   for l, (f, hw) in freqs.items()})

    macro = [r.serving_distance for r in results if r.user_class is UserClass.MACRO]
    if len(macro) >= 100:
        with timer.env('ks'):
            ks = ks_distance(macro, class_models(cfg, args.method)[UserClass.MACRO].distance_cdf)
        out.summary(ks_macro_distance=ks)

    say('Max gaps: SINR %.4f, rate %.4f' % (sinr_gap.gap.max(), rate_gap.gap.max()))
    return EXIT_OK


def mode_optimize(cfg:NetworkConfig, out:Outputs) -> int:
    sweep = optimize.SweepSpec.from_cfg(cfg)

    with timer.env('optimize'):
        res = optimize.optimize_joint(cfg, sweep, quiet=args.quiet or not args.progress)
    out.write('surface.csv', res.surface_frame())
    for cell in res.failed_cells:
        out.log.log('warning', stage='optimize', bias_db=cell.bias_db, eta=cell.eta, message=cell.message)

    out.summary(bias_db=res.bias_db, eta=res.eta, objective=res.objective,
                offload_fraction=res.offload_fraction, failed_cells=len(res.failed_cells))
    say('Best: B = %.1f dB, eta = %.2f, objective %.6g, offload fraction %.3f'
        % (res.bias_db, res.eta, res.objective, res.offload_fraction))

    if cfg.sweep.density_factors:
        with timer.env('density_sweep'):
            trend = optimize.density_sweep(cfg, cfg.sweep.density_factors, sweep)
        out.write('density_trend.csv', pd.DataFrame([pt._asdict() for pt in trend],
                                                    columns=list(optimize.DensityPoint._fields)))
    return EXIT_OK


def mode_claims(cfg:NetworkConfig, out:Outputs) -> int:
    with timer.env('claims'):
        report = optimize.run_claims(cfg.mc.seed)

    out.write('claim1.csv', report.claim1_frame())
    out.write('claim2.csv', report.claim2)
    out.write('claim3.csv', report.claim3)

    if cfg.num_tiers == 2:
        with timer.env('sinr_vs_bias'):
            trend = optimize.sinr_bias_trend(cfg, cfg.sweep.bias_db)
        out.write('sinr_vs_bias.csv', pd.DataFrame([pt._asdict() for pt in trend],
                                                   columns=list(optimize.BiasTrendPoint._fields)))

    out.summary(claim1_max_derivative=report.claim1.max_derivative, claim1_passed=report.claim1.passed,
                claim2_passed=report.claim2_passed, claim3_passed=report.claim3_passed)

    if not report.passed:
        print('Error: claims check failed (claim1 %s, claim2 %s, claim3 %s)'
              % (report.claim1.passed, report.claim2_passed, report.claim3_passed), file=sys.stderr)
        return EXIT_CLAIMS
    return EXIT_OK


MODE_FUNCTIONS = {
    'sinr'    : mode_sinr,
    'rate'    : mode_rate,
    'backhaul': mode_backhaul,
    'validate': mode_validate,
    'optimize': mode_optimize,
    'claims'  : mode_claims,
}



def run(argv=None) -> int:
    parse_args(argv)

    try:
        run_cfg = resolve_config(args.config)
    except ConfigError as e:
        print('Error: %s' % e, file=sys.stderr)
        return EXIT_CONFIG

    os.makedirs(args.out, exist_ok=True)
    manifest = RunManifest(config_to_dict(run_cfg), args.mode, run_cfg.mc.seed, VERSION)
    log = Log('hetnet', args.out, session_data={'config': manifest.config, 'args': vars(args), 'version': VERSION})
    out = Outputs(args.out, manifest, log)

    timer.reset()
    start = time.time()
    try:
        with timer.env(args.mode):
            code = MODE_FUNCTIONS[args.mode](run_cfg, out)
    except HetNetError as e:
        print('Error: %s' % e, file=sys.stderr)
        log.log('error', message=str(e), exit_code=exit_code(e))
        return exit_code(e)

    manifest.wall_clock = time.time() - start
    manifest.timings = timer.stats()
    manifest.write(args.out)
    log.log('stage', timings=manifest.timings)
    log.log('summary', exit_code=code, **manifest.summary)

    if not args.quiet:
        timer.print_stats()

    return code


if __name__ == '__main__':
    sys.exit(run())
