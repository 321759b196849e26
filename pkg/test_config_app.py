"""
Tests for run configurations, result files and the command layer
"""
import csv
import json

import numpy as np
import pytest

import app
from app import cmd_bethe, cmd_matel, cmd_spectrum, cmd_thermo
from config import Config, load_run_config, parse_complex, parse_run_config
from conftest import BASE_BOUNDARY, ETA, MASSLESS_ETA, THERMO_BOUNDARY
from errors import ConfigError
from results import ResultStore, to_jsonable
from run import run

BOUNDARY_KEYS = ('varsigma_p', 'kappa_p', 'tau_p', 'varsigma_m', 'kappa_m', 'tau_m')


def pair(z):
    z = complex(z)
    return [z.real, z.imag]


def make_config(N=3, sector=1, tune=True, boundary=BASE_BOUNDARY, eta=ETA, **extra):
    values = {k: pair(getattr(boundary, k)) for k in BOUNDARY_KEYS}
    values['tune_tau_p'] = tune
    return {'chain': {'N': N, 'eta': pair(eta)}, 'boundary': values, 'sector': sector, **extra}


def write_config(tmp_path, data, name='run.json'):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def test_parse_complex():
    assert parse_complex(1.5, 'x') == 1.5
    assert parse_complex([0.2, -0.3], 'x') == 0.2 - 0.3j
    for bad in ('1+2j', [1, 2, 3], True):
        with pytest.raises(ConfigError):
            parse_complex(bad, 'x')


def test_parse_run_config_defaults():
    cfg = parse_run_config(make_config())
    assert cfg.N == 3 and cfg.eta == ETA
    assert cfg.eps_signs == [1, 1, 1, 1]
    assert cfg.regime == 'A'
    assert len(cfg.lambda_samples) == 5
    assert cfg.word().m == 0
    assert cfg.chain().N == 3


@pytest.mark.parametrize('mutate', [
    lambda d: d.pop('chain'),
    lambda d: d['chain'].update(N=13),
    lambda d: d['chain'].update(xi=[0.1]),
    lambda d: d['boundary'].pop('kappa_m'),
    lambda d: d.update(eps=[1, 1, 1, -1]),
    lambda d: d.update(sector=7),
    lambda d: d.update(regime='Z'),
    lambda d: d.update(word={'eps': [1, 2], 'eps_prime': [1]}),
    lambda d: d.update(word={'eps': [1, 1, 1, 1], 'eps_prime': [1, 1, 1, 1]}),
    lambda d: d.update(finite_sizes=[1]),
    lambda d: d['chain'].update(xi_scale='wide'),
    lambda d: d['chain'].update(xi_scale=-0.5),
    lambda d: d.update(word=[1, 2]),
    lambda d: d.update(word={'eps': 2, 'eps_prime': 2}),
    lambda d: d.update(lambda_samples=0.3),
    lambda d: d.update(lambda_samples=[]),
    lambda d: d.update(finite_sizes=8),
    lambda d: d.update(quadrature=[32]),
    lambda d: d['boundary'].update(tune_tau_p='yes'),
])
def test_parse_run_config_rejects(mutate):
    data = make_config()
    mutate(data)
    with pytest.raises(ConfigError) as info:
        parse_run_config(data)
    assert info.value.exit_code == 3


def test_load_run_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(str(tmp_path / 'missing.json'))
    broken = tmp_path / 'broken.json'
    broken.write_text('{"chain": ')
    with pytest.raises(ConfigError):
        load_run_config(str(broken))
    assert load_run_config(write_config(tmp_path, make_config())).sector == 1


def test_config_override(monkeypatch):
    monkeypatch.setattr(Config, 'TOL', Config.TOL)
    monkeypatch.setattr(Config, 'THREADS', Config.THREADS)
    Config.override(tol=1e-9, threads=0)
    assert Config.TOL == 1e-9
    assert Config.THREADS == 1


def test_to_jsonable():
    data = {'z': 1 + 2j, 'arr': np.array([1j, 2]), 'n': np.int64(3), 'nan': float('nan'), 'ok': np.bool_(True)}
    assert to_jsonable(data) == {'z': [1.0, 2.0], 'arr': [[0.0, 1.0], [2.0, 0.0]], 'n': 3,
                                 'nan': 'nan', 'ok': True}


def test_result_store_round_trip(tmp_path):
    result = {'status': 'success', 'value': 0.5 - 0.25j}
    rows = [{'branch': 0, 'tau': 1 + 1j}, {'branch': 1, 'tau': 2 - 1j}]
    assert ResultStore.render_json(result) == ResultStore.render_json(dict(reversed(list(result.items()))))

    store = ResultStore(str(tmp_path / 'out' / 'result.json'))
    path = store.save(result, rows)
    assert store.load(path) == {'status': 'success', 'value': [0.5, -0.25]}

    csv_store = ResultStore(str(tmp_path / 'table.csv'), 'csv')
    csv_path = csv_store.save(result, rows)
    with open(csv_path) as f:
        records = list(csv.DictReader(f))
    assert list(records[0]) == ['branch', 'tau_im', 'tau_re']
    assert records[1]['tau_im'] == '-1.0'
    assert ResultStore().save(result) is None
    with pytest.raises(ValueError):
        ResultStore(fmt='xml')


def test_run_reports_malformed_config(tmp_path, capsys):
    path = write_config(tmp_path, {'chain': {'N': 3}})
    assert run(['verify', '--config', path]) == 3
    assert json.loads(capsys.readouterr().out)['error'] == 'ConfigError'


def test_run_verify_fails_off_the_constraint(tmp_path):
    data = make_config(tune=False)
    data['boundary']['tau_p'] = [0.5, 0.0]
    out = tmp_path / 'verify.json'
    assert run(['verify', '--config', write_config(tmp_path, data), '--out', str(out)]) == 2
    saved = json.loads(out.read_text())
    assert 'constraint' in saved['failed']


def test_run_verify_on_tuned_chain(tmp_path):
    out = tmp_path / 'verify.json'
    assert run(['verify', '--config', write_config(tmp_path, make_config()), '--out', str(out)]) == 0
    saved = json.loads(out.read_text())
    assert saved['status'] == 'success'
    assert not saved['failed']


def test_run_spectrum_as_csv(tmp_path):
    out = tmp_path / 'spectrum.csv'
    code = run(['spectrum', '--config', write_config(tmp_path, make_config()), '--out', str(out),
                '--format', 'csv'])
    assert code == 0
    with open(out) as f:
        records = list(csv.DictReader(f))
    assert len(records) == 8
    assert 'tau_0_re' in records[0]
    assert (tmp_path / 'spectrum.json').exists()


def test_run_rejects_seed_roots_for_spectrum(tmp_path):
    seeds = tmp_path / 'seeds.json'
    seeds.write_text('[[0.2, 0.1]]')
    code = run(['spectrum', '--config', write_config(tmp_path, make_config()), '--seed-roots', str(seeds)])
    assert code == 3


def test_bethe_command_off_the_constraint():
    cfg = parse_run_config(make_config(tune=False))
    result = cmd_bethe(cfg)
    assert result['status'] == 'error'
    assert result['error'] == 'ConstraintViolated'
    assert result['exit_code'] == 2


def test_thermo_command():
    data = make_config(N=2, tune=False, boundary=THERMO_BOUNDARY, eta=MASSLESS_ETA,
                       word={'eps': [2], 'eps_prime': [2]},
                       quadrature={'check': False, 'nodes': 32, 'panels': 16, 'xi': [0.1]})
    result = cmd_thermo(parse_run_config(data))
    assert result['status'] == 'success', result
    assert np.isfinite(result['value'])
    assert result['density']['regime'] == 'massless'
    assert result['rows'] == [{'regime': 'A', 'value': result['value']}]


def test_matel_command_identity_and_non_conserving_words():
    identity = cmd_matel(parse_run_config(make_config()))
    assert identity['status'] == 'success'
    for row in identity['results']:
        assert row['formula'] == 1 and row['oracle'] == 1

    refused = cmd_matel(parse_run_config(make_config(word={'eps': [1], 'eps_prime': [2]})))
    assert refused['error'] == 'NonConservingWord'
    assert refused['exit_code'] == 3


def test_bethe_command_honours_seed_roots(sector):
    seed = sector(3, 1).solutions[0].roots
    result = cmd_bethe(parse_run_config(make_config()), seed_roots=[seed[0] + 1e-4])
    assert result['status'] == 'success'
    assert len(result['solutions']) == 1
    assert result['solutions'][0]['match_deviation'] < 1e-7


def test_linear_algebra_failure_maps_to_numerical_exit(monkeypatch):
    def broken(*args, **kwargs):
        raise np.linalg.LinAlgError('SVD did not converge')

    monkeypatch.setattr(app, 'build_spectrum_table', broken)
    result = cmd_spectrum(parse_run_config(make_config()))
    assert result['error'] == 'NumericalFailure'
    assert result['exit_code'] == 4
    assert result['diagnostics']['exception'] == 'LinAlgError'


def test_bethe_command_rejects_seed_of_wrong_length(sector):
    seed = sector(3, 1).solutions[0].roots
    result = cmd_bethe(parse_run_config(make_config()), seed_roots=[seed[0], seed[0] + 0.3])
    assert result['error'] == 'ConfigError'
    assert result['exit_code'] == 3


def test_bethe_result_file_seeds_a_later_run(tmp_path):
    config = write_config(tmp_path, make_config())
    first = tmp_path / 'bethe.json'
    assert run(['bethe', '--config', config, '--out', str(first)]) == 0
    second = tmp_path / 'again.json'
    assert run(['bethe', '--config', config, '--seed-roots', str(first), '--out', str(second)]) == 0
    saved = json.loads(second.read_text())
    assert len(saved['solutions']) == 1
    earlier = json.loads(first.read_text())['solutions'][0]['roots']
    assert np.allclose(saved['solutions'][0]['roots'], earlier, atol=1e-9)
