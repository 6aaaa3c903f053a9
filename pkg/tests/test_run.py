import json
import os

import pytest

import optimize
import run
from data.config import config_from_dict, config_to_dict
from layers.output_utils import file_checksum
from utils.errors import ConvergenceError
from utils.logger import read_log

KTIER_JSON = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'data', 'configs', 'ktier.json')


def _run(out, *argv):
    return run.run(['--out', str(out), '--quiet', *argv])

def _header(path):
    with open(path, 'r') as f:
        return f.readline().strip()

def _manifest(out):
    with open(os.path.join(str(out), 'manifest.json'), 'r') as f:
        return json.load(f)


def test_sinr_mode(tmp_path):
    assert _run(tmp_path, '--config', 'alpha4_config', '--mode', 'sinr') == 0
    assert _header(tmp_path / 'sinr_coverage.csv') == 'threshold_db,coverage,class_macro,class_small,class_offloaded'
    assert _header(tmp_path / 'association.csv') == 'class,probability,mean_load'
    assert 0. < _manifest(tmp_path)['summary']['coverage_0db'] < 1.


def test_ktier_sinr_mode(tmp_path):
    assert _run(tmp_path, '--config', KTIER_JSON, '--mode', 'sinr', '--ktier_variant', 'printed') == 0
    assert _header(tmp_path / 'ktier_coverage.csv') == \
        'threshold_db,tier,class_unbiased,class_offloaded,weight_unbiased,weight_offloaded'


def test_rate_mode_manifest(tmp_path):
    assert _run(tmp_path, '--config', 'alpha4_config', '--mode', 'rate') == 0
    manifest = _manifest(tmp_path)

    assert manifest['mode'] == 'rate'
    assert set(manifest['outputs']) == {'rate_coverage.csv', 'rate_mean_load.csv', 'load_pmf.csv'}
    for name, checksum in manifest['outputs'].items():
        assert file_checksum(str(tmp_path / name)) == checksum
    assert manifest['summary']['rho95_bracketed']
    assert manifest['summary']['rho95_bps'] < manifest['summary']['median_bps']
    assert _header(tmp_path / 'rate_coverage.csv').startswith('threshold_bps,coverage,')


def test_manifest_config_reloads(tmp_path):
    assert _run(tmp_path, '--config', 'alpha4_config', '--mode', 'sinr', '--seed', '7') == 0
    echoed = _manifest(tmp_path)['config']
    cfg = config_from_dict(echoed)
    assert cfg.mc.seed == 7
    assert config_to_dict(cfg)['tiers'] == echoed['tiers']


def test_reruns_are_byte_identical(tmp_path):
    first, second = tmp_path / 'a', tmp_path / 'b'
    assert _run(first, '--config', 'alpha4_config', '--mode', 'rate') == 0
    assert _run(second, '--config', 'alpha4_config', '--mode', 'rate') == 0
    assert _manifest(first)['outputs'] == _manifest(second)['outputs']


def test_log_sessions(tmp_path):
    for _ in range(2):
        assert _run(tmp_path, '--config', 'alpha4_config', '--mode', 'sinr') == 0

    entries = read_log(str(tmp_path / 'hetnet.log'))
    assert [e['session'] for e in entries if e['type'] == 'session'] == [0, 1]
    summaries = read_log(str(tmp_path / 'hetnet.log'), session=1)
    assert summaries[-1]['type'] == 'summary'
    assert summaries[-1]['data']['exit_code'] == 0


def test_missing_key_is_a_config_error(tmp_path, capsys):
    path = tmp_path / 'broken.json'
    with open(path, 'w') as f:
        json.dump({'tiers': [], 'user_density_per_km2': 1., 'bandwidth_hz': 1e7, 'noise_dbm': None}, f)

    assert _run(tmp_path, '--config', str(path), '--mode', 'sinr') == 2
    assert 'eta' in capsys.readouterr().err


def test_unknown_preset(tmp_path, capsys):
    assert _run(tmp_path, '--config', 'nonexistent_config') == 2
    assert 'nonexistent_config' in capsys.readouterr().err


def test_two_tier_mode_on_three_tiers(tmp_path, capsys):
    assert _run(tmp_path, '--config', KTIER_JSON, '--mode', 'rate') == 2
    assert 'tiers' in capsys.readouterr().err


def test_non_convergence_exit_code(tmp_path, monkeypatch, capsys):
    def diverge(*args, **kwargs):
        raise ConvergenceError('no progress after 50 subdivisions', 0.1)

    monkeypatch.setattr(optimize, 'optimize_joint', diverge)
    assert _run(tmp_path, '--config', 'alpha4_config', '--mode', 'optimize') == 3
    assert 'no progress' in capsys.readouterr().err
    assert read_log(str(tmp_path / 'hetnet.log'))[-1]['type'] == 'error'


def test_claims_mode(tmp_path):
    assert _run(tmp_path, '--config', 'alpha4_config', '--mode', 'claims') == 0
    for name in ('claim1.csv', 'claim2.csv', 'claim3.csv', 'sinr_vs_bias.csv'):
        assert os.path.exists(str(tmp_path / name))
    assert _manifest(tmp_path)['summary']['claim1_passed']


def test_validate_mode(tmp_path, sparse):
    path = tmp_path / 'sparse.json'
    with open(path, 'w') as f:
        json.dump(config_to_dict(sparse), f)

    assert _run(tmp_path, '--config', str(path), '--mode', 'validate', '--drops', '150', '--seed', '3') == 0
    summary = _manifest(tmp_path)['summary']
    assert 0. <= summary['max_gap_sinr'] <= 1.
    assert set(summary['class_frequencies']) == {'1', 'Bbar', 'B'}
    assert _header(tmp_path / 'gap_rate.csv') == 'threshold_bps,analytic,empirical,halfwidth,gap'


@pytest.mark.slow
def test_validation_preset_validates(tmp_path):
    assert _run(tmp_path, '--config', 'validation_config', '--mode', 'validate') == 0
    summary = _manifest(tmp_path)['summary']
    assert summary['max_gap_sinr'] <= 0.04
    assert summary['max_gap_rate'] <= 0.04
